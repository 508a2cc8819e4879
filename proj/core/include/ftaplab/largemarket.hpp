#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ftaplab/duality.hpp"
#include "ftaplab/market.hpp"
#include "ftaplab/orlicz.hpp"

namespace ftaplab {

/// A rule n -> finite market (1-based). Parametric families are constant in
/// n; the asymptotics live in the sequence viewpoint.
class MarketFamily {
 public:
  enum class Kind { Explicit, Klein, Binomial, Custom };

  static MarketFamily explicit_list(std::vector<FiniteMarket> markets, int prefix = -1);
  /// One-period market S_0 = 0, S_1 = 1 on a set of probability alpha,
  /// else 0. Admits one-period arbitrage by construction.
  static MarketFamily klein(double alpha, int prefix = 10);
  static MarketFamily binomial(double p, double up, double down, int periods, int prefix = 10);
  static MarketFamily custom(std::function<FiniteMarket(int)> rule, bool constant_in_n,
                             int prefix = 10);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  int prefix() const { return prefix_; }
  void set_prefix(int n) { prefix_ = n; }
  /// True when market(n) is the same market for every n.
  bool constant_in_n() const { return constant_; }

  FiniteMarket market(int n) const;

  static MarketFamily from_json(const nlohmann::json& doc, const std::string& base_dir = "");
  nlohmann::json to_json() const;

 private:
  MarketFamily() = default;
  Kind kind_ = Kind::Explicit;
  bool constant_ = false;
  double alpha_ = 0.0;
  double p_ = 0.0, up_ = 0.0, down_ = 0.0;
  int periods_ = 0;
  int prefix_ = 10;
  std::vector<FiniteMarket> markets_;
  std::function<FiniteMarket(int)> rule_;
};

/// Per-index densities on the n-th market's leaf space.
struct MeasureSeq {
  std::vector<DensityVector> densities;  // index n-1
  bool constant_rule = false;            // same closed-form density for every n

  const DensityVector& at(int n) const { return densities.at(static_cast<std::size_t>(n - 1)); }
  int size() const { return static_cast<int>(densities.size()); }
};

/// dQ/dP = 1 for the first N markets.
MeasureSeq identity_measures(const MarketFamily& family, int N);

enum class Direction { QGivenP, PGivenQ };

struct YoungDomination {
  bool found = false;
  double exponent = 0.0;
  std::optional<YoungFunction> witness;
  double worst_moment = 0.0;  // sup_n E[F(density)] at the witness
  bool certified_all_n = false;
};

/// Searches the power family F(x) = x^p/p, p <= 8, for the largest p with
/// sup_{n<=N} E[F(density_n)] <= 1. A witness certifies contiguity on the
/// prefix; for constant families the prefix value decides every n.
YoungDomination young_domination(const MarketFamily& family, const MeasureSeq& Q, int N,
                                 Direction dir = Direction::QGivenP);

struct ContiguityProfile {
  std::vector<double> eps_grid;
  std::vector<double> delta_q_given_p;  // inf P-mass needed to capture Q-mass eps
  std::vector<double> delta_p_given_q;  // mirror profile
  std::vector<double> kappa_grid;
  std::vector<double> ui_tail;          // sup_n E_P[rho 1{rho > kappa}]
  YoungDomination young_witness;
  bool certified_all_n = false;
};

/// Empirical contiguity diagnostics over the prefix. Worst sets are exact
/// optimizers of the fractional set class {0 <= w <= 1} (the vertex has at
/// most one fractional atom).
ContiguityProfile contiguity_profile(const MarketFamily& family, const MeasureSeq& Q, int N);

/// min E_objective[w] over {0 <= w <= 1, E_constraint[w] >= eps}, measures
/// given atomwise. Exact greedy on the objective/constraint ratio; the
/// optimum is a ratio-threshold set with at most one fractional atom.
/// value is +inf when the constraint cannot be met.
struct FractionalSet {
  std::vector<double> w;
  double value = 0.0;
};
FractionalSet extremal_min_mass(const std::vector<double>& objective_measure,
                                const std::vector<double>& constraint_measure, double eps);

enum class VerdictStatus { Found, NotFoundOnPrefix, CertifiedAbsent };

struct DetectorCertificate {
  int k = 0;               // position in the schedule
  int n = 0;               // market index
  double bound = 0.0;      // admissibility floor c_k (1 for K_1 conditions)
  double level = 0.0;      // payoff level (L_k or alpha)
  double prob = 0.0;       // P(claim >= level)
  std::vector<double> strategy;
  std::vector<double> claim;  // truncated payoff, an element of C
};

struct Verdict {
  std::string condition;   // AA1 / AA2 / SAA / AFLBR / NAMFL-wc / NAFL-sep
  VerdictStatus status = VerdictStatus::NotFoundOnPrefix;
  double level = 0.0;      // achieved probability level (alpha)
  std::vector<DetectorCertificate> certificates;
  std::vector<double> per_k_values;
  std::string note;
};

struct DetectorParams {
  int prefix = 10;
  std::size_t enum_limit = 15;       // leaf cap for exhaustive subset search
  double found_threshold = 1e-3;     // positive floor for prefix "found"
  std::vector<double> alpha_grid{0.75, 0.5, 0.25, 0.1, 0.05};
};

Verdict detect_aa1(const MarketFamily& family, const DetectorParams& params = {});
Verdict detect_aa2(const MarketFamily& family, const DetectorParams& params = {});
Verdict detect_saa(const MarketFamily& family, const DetectorParams& params = {});
Verdict detect_aflbr(const MarketFamily& family, const DetectorParams& params = {});

struct NamflResult {
  double value = 0.0;              // worst-case sup_{f} E_R[u_F(f - w)] over w in D^eps
  std::vector<double> worst_w;
  std::vector<double> q;           // dual separating measure (empty when at the apex)
  double lambda = 0.0;
  bool free_lunch_signal = false;  // value >= 0 within tolerance
  double primal_cross_check = 0.0; // sup-utility value at the reported worst w
};

/// Worst-case market-free-lunch value via the minimax exchange
///   max_{w in D^eps} sup_{f in C} E_R[u_F(f-w)]
///   = min_{z in cone(M densities)} [ -knap_min(r.z) + E_R[v(z)] ].
NamflResult namfl_worstcase(const FiniteMarket& market, const DensityVector& R, double eps,
                            const YoungFunction& F);

enum class NaflOutcome { NoWitness, Witness, Inconclusive };

struct NaflResult {
  NaflOutcome outcome = NaflOutcome::Inconclusive;
  double lower = 0.0;   // certified lower bound on the separation quantity
  double upper = 0.0;   // best found value
  bool exact_mode = false;
  std::vector<double> f, w, g;  // witness decomposition f = w + g when found
};

/// Separation check of C against D^eps + V^F. Norm mode minimizes
/// ||f - w||_G and classifies through the polar sandwich (factor 2 band);
/// exact mode minimizes the polar gauge itself, leaving only a numerical
/// tolerance band.
NaflResult nafl_check(const FiniteMarket& market, double eps, const YoungFunction& F,
                      bool exact_mode = false);

struct HsHypothesisViolation : std::runtime_error {
  HsHypothesisViolation(std::vector<std::size_t> set, double best_mass)
      : std::runtime_error("no candidate measure exceeds delta on a set of large probability"),
        violating_set(std::move(set)),
        best(best_mass) {}
  std::vector<std::size_t> violating_set;
  double best;
};

struct HsSelectResult {
  std::vector<double> q0;             // selected measure on atoms
  std::vector<double> weights;        // convex weights over the input measures
  double bound = 0.0;                 // eps^2 delta / 2
  double worst_mass = 1.0;            // min Q0(A) over subsets with P(A) > 4 eps
  std::vector<std::size_t> worst_set;
  bool certified = false;             // worst_mass > bound, checked exhaustively
};

/// Quantitative measure selection: from a convex family (given by its
/// extreme measures) satisfying "P(A) > eps implies some member exceeds
/// delta on A", selects one member exceeding eps^2 delta/2 on every set
/// with P(A) > 4 eps. Cutting-plane LP with exhaustive subset separation;
/// atoms capped at 15.
HsSelectResult hs_select(const FiniteProbSpace& space,
                         const std::vector<std::vector<double>>& extreme_measures, double eps,
                         double delta);
HsSelectResult hs_select(const FiniteProbSpace& space, const SeparatingSet& mset, double eps,
                         double delta);

struct MixResult {
  MeasureSeq mixture;
  double renormalization = 1.0;  // 1/(1 - 2^-J)
  double remainder = 0.0;        // 2^-J
  bool covering_ok = false;      // every atom charged by some input
  bool strictly_positive = false;
  std::vector<double> delta_j;          // per-j uniform mass bounds at eps_j = 2^-j
  std::vector<double> reverse_constant; // 2^j / delta_j as used by the reverse bound
  bool reverse_bound_verified = false;  // P(A) <= 2^-j + const_j Q(A) for all sets, all j, n
};

/// Truncated geometric mixture Q^n = sum_{j<=J} 2^-j Q^{n,j} / (1 - 2^-J).
/// Inputs must lie in the n-th separating set; the covering property makes
/// the output strictly positive, and the per-j mass bounds quantify both
/// contiguity directions on the prefix.
MixResult mix_sequences(const MarketFamily& family, const std::vector<MeasureSeq>& per_eps, int J);

struct BuildError {
  std::string what;      // human-readable, names the failing eps / n / set
  int n = 0;
  double eps = 0.0;
  std::vector<std::size_t> set;
};

struct BuildOptions {
  std::vector<YoungFunction> F_grid{YoungFunction::power(2.0)};
  int J = 6;                      // eps grid 2^-1 .. 2^-J
  std::size_t set_enum_limit = 10;  // exhaustive candidate sets up to this leaf count
};

struct BuildOutcome {
  bool success = false;
  BuildError error;
  MeasureSeq emm_seq;
  ContiguityProfile profile;
  YoungDomination domination_forward;
  YoungDomination domination_reverse;
  std::vector<double> eps_grid;
  std::vector<double> delta_of_eps;  // chosen delta per grid eps
  YoungFunction chosen_F = YoungFunction::power(2.0);
  double remainder = 0.0;
};

/// The constructive pipeline: per grid eps and market, builds separating
/// measures from worst sets, selects one per market with the quantitative
/// Halmos-Savage step, and mixes across the eps grid into a strictly
/// positive martingale-measure sequence with two-sided contiguity
/// diagnostics. Any precondition failure is reported as a structured error
/// (the free-lunch branch).
BuildOutcome build_bicontiguous(const MarketFamily& family, int N,
                                const BuildOptions& options = {});

}  // namespace ftaplab
