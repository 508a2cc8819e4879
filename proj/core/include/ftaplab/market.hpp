#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ftaplab/linprog_exact.hpp"
#include "ftaplab/prob.hpp"

namespace ftaplab {

struct MarketNode {
  std::string id;
  int parent = -1;                // -1 for the root
  double prob = 1.0;              // conditional branch probability
  std::vector<double> prices;     // one per asset
  int depth = 0;                  // filled during validation
  std::vector<int> children;      // filled during validation
};

/// A finite discrete-time market: an event tree with per-branch conditional
/// probabilities and d asset prices per node. All leaves sit at depth T and
/// the induced leaf probabilities are strictly positive.
class FiniteMarket {
 public:
  FiniteMarket(int horizon, int assets, std::vector<MarketNode> nodes);

  static FiniteMarket from_json(const nlohmann::json& doc);
  static FiniteMarket load(const std::string& path);
  nlohmann::json to_json() const;

  int horizon() const { return horizon_; }
  int assets() const { return assets_; }
  const std::vector<MarketNode>& nodes() const { return nodes_; }
  const MarketNode& node(int i) const { return nodes_[i]; }
  const std::vector<int>& leaves() const { return leaves_; }
  std::size_t num_leaves() const { return leaves_.size(); }
  /// Reference measure on the leaves (path products of branch probabilities).
  const FiniteProbSpace& leaf_space() const { return leaf_space_; }
  int node_index(const std::string& id) const;
  /// Leaf position (0-based among leaves) of a node id, -1 if not a leaf.
  int leaf_position(const std::string& id) const;

 private:
  void validate_and_index();

  int horizon_ = 0;
  int assets_ = 0;
  std::vector<MarketNode> nodes_;
  std::vector<int> leaves_;
  FiniteProbSpace leaf_space_;
};

/// One-period market with d = 1: S_0 = s0 and S_1 = terminal[i] on leaf i.
FiniteMarket make_single_period(const std::vector<double>& probs,
                                const std::vector<double>& terminal, double s0 = 0.0);

/// Non-recombining i.i.d. binary tree, S_{t+1} = S_t + up (prob p) or
/// S_t + down, started at S_0 = 0.
FiniteMarket make_binomial_tree(double p, double up, double down, int periods);

/// Terminal payoffs of one-unit positions: one column per (non-terminal
/// node, asset), rows indexed by leaves. The gains cone K is the span.
struct GainsBasis {
  struct ColumnKey {
    int node;
    int asset;
  };
  std::vector<std::vector<double>> columns;  // each of length num_leaves
  std::vector<ColumnKey> keys;
  std::size_t num_leaves = 0;

  std::size_t num_columns() const { return columns.size(); }
  /// B xi: terminal payoff of the strategy with coordinates xi.
  std::vector<double> apply(const std::vector<double>& xi) const;
};

GainsBasis gains_basis(const FiniteMarket& market);

/// The separating-measure polyhedron {q >= 0, sum q = 1, B'q = 0} on the
/// leaf space. Members price every gains-cone claim at zero, hence
/// E_q[f] <= 0 on the superreplication cone.
class SeparatingSet {
 public:
  explicit SeparatingSet(const FiniteMarket& market);

  const GainsBasis& basis() const { return basis_; }
  const FiniteProbSpace& space() const { return space_; }
  bool contains(const std::vector<double>& q, double tol = 1e-8) const;
  /// Extreme points, enumerated from basic solutions. Intended for small
  /// leaf counts; throws beyond max_leaves.
  std::vector<std::vector<double>> vertices(std::size_t max_leaves = 16) const;

 private:
  GainsBasis basis_;
  FiniteProbSpace space_;
};

struct EmmResult {
  bool found = false;
  std::vector<double> q;        // martingale measure on leaves
  std::vector<double> density;  // dQ/dP
  double min_prob = 0.0;        // optimal lower bound on the q entries
};

/// Searches for an equivalent martingale measure by maximizing the smallest
/// leaf probability over the separating polyhedron.
EmmResult find_emm(const FiniteMarket& market);

struct NaResult {
  bool no_arbitrage = false;
  double lp_gain = 0.0;              // max E_P[f] over K with 0 <= f <= 1
  std::vector<double> payoff;        // arbitrage certificate f in K (if any)
  std::vector<double> strategy;      // xi with f = B xi
  bool exact = false;                // certificate came from the rational solve
  std::vector<Rational> exact_payoff;
  std::vector<Rational> exact_strategy;
};

/// No-arbitrage check via the gains LP max E_P[f], f in K, 0 <= f <= 1.
/// Decided independently of find_emm; the two agreeing is the finite-space
/// fundamental theorem. Certificates are re-derived in exact rational
/// arithmetic when the leaf count allows it.
NaResult check_na(const FiniteMarket& market, std::size_t exact_max_leaves = 12);

struct ExactArbitrageCheck {
  bool in_cone = true;        // payoff equals B xi exactly (by construction)
  bool nonnegative = false;   // f >= 0 exactly
  bool positive_mass = false; // E_P[f] > 0 exactly
  bool ok() const { return in_cone && nonnegative && positive_mass; }
};

/// Re-verifies an arbitrage strategy in exact rational arithmetic against
/// the market's price data.
ExactArbitrageCheck verify_arbitrage_exact(const FiniteMarket& market,
                                           const std::vector<Rational>& strategy);

struct InCResult {
  bool member = false;
  std::vector<double> dominating;  // k in K with k >= f
  std::vector<double> slack;       // k - f
  double shortfall = 0.0;          // LP value; 0 iff member
};

/// f belongs to the superreplication cone C = (K - L0_+) iff some k in K
/// dominates it.
InCResult in_C(const FiniteMarket& market, const std::vector<double>& f);

/// f in K1 = {f in K : f >= -1}: span membership within 1e-9 plus the
/// floor check.
bool k1_membership(const FiniteMarket& market, const std::vector<double>& f);

}  // namespace ftaplab
