#include "ftaplab/market.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <stdexcept>

#include "ftaplab/linprog.hpp"

namespace ftaplab {

FiniteMarket::FiniteMarket(int horizon, int assets, std::vector<MarketNode> nodes)
    : horizon_(horizon), assets_(assets), nodes_(std::move(nodes)) {
  validate_and_index();
}

void FiniteMarket::validate_and_index() {
  if (horizon_ < 1) throw std::invalid_argument("market horizon must be >= 1");
  if (assets_ < 1) throw std::invalid_argument("market needs at least one asset");
  if (nodes_.empty()) throw std::invalid_argument("market has no nodes");

  std::map<std::string, int> by_id;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id.empty()) throw std::invalid_argument("node " + std::to_string(i) + " has empty id");
    if (!by_id.emplace(nodes_[i].id, static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate node id '" + nodes_[i].id + "'");
  }

  int root = -1;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& nd = nodes_[i];
    nd.children.clear();
    if (nd.prices.size() != static_cast<std::size_t>(assets_))
      throw std::invalid_argument("node '" + nd.id + "' has " + std::to_string(nd.prices.size()) +
                                  " prices, expected " + std::to_string(assets_));
    for (double s : nd.prices)
      if (!std::isfinite(s)) throw std::invalid_argument("node '" + nd.id + "' has non-finite price");
    if (nd.parent < 0) {
      if (root >= 0)
        throw std::invalid_argument("two roots: '" + nodes_[root].id + "' and '" + nd.id + "'");
      root = static_cast<int>(i);
      if (std::abs(nd.prob - 1.0) > 1e-12)
        throw std::invalid_argument("root node '" + nd.id + "' must have probability 1");
    } else if (nd.parent >= static_cast<int>(nodes_.size())) {
      throw std::invalid_argument("node '" + nd.id + "' references a missing parent");
    }
  }
  if (root < 0) throw std::invalid_argument("market has no root node");

  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].parent >= 0) nodes_[nodes_[i].parent].children.push_back(static_cast<int>(i));

  // Depths via BFS from the root; detects unreachable nodes and cycles.
  for (auto& nd : nodes_) nd.depth = -1;
  std::vector<int> queue{root};
  nodes_[root].depth = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    int v = queue[h];
    for (int c : nodes_[v].children) {
      nodes_[c].depth = nodes_[v].depth + 1;
      if (nodes_[c].depth > horizon_)
        throw std::invalid_argument("node '" + nodes_[c].id + "' lies deeper than the horizon");
      queue.push_back(c);
    }
  }
  for (const auto& nd : nodes_)
    if (nd.depth < 0) throw std::invalid_argument("node '" + nd.id + "' is unreachable from the root");

  leaves_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    if (nd.children.empty()) {
      if (nd.depth != horizon_)
        throw std::invalid_argument("leaf '" + nd.id + "' sits at depth " +
                                    std::to_string(nd.depth) + ", expected horizon " +
                                    std::to_string(horizon_));
      leaves_.push_back(static_cast<int>(i));
    } else {
      double s = 0.0;
      for (int c : nd.children) {
        if (!(nodes_[c].prob > 0.0))
          throw std::invalid_argument("branch to node '" + nodes_[c].id +
                                      "' has non-positive probability");
        s += nodes_[c].prob;
      }
      if (std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument("branch probabilities below node '" + nd.id + "' sum to " +
                                    std::to_string(s));
    }
  }

  std::vector<std::string> labels;
  std::vector<double> probs;
  for (int li : leaves_) {
    double p = 1.0;
    for (int v = li; v >= 0; v = nodes_[v].parent) p *= nodes_[v].prob;
    labels.push_back(nodes_[li].id);
    probs.push_back(p);
  }
  double total = 0.0;
  for (double p : probs) total += p;
  for (double& p : probs) p /= total;
  leaf_space_ = FiniteProbSpace(std::move(labels), std::move(probs));
}

int FiniteMarket::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].id == id) return static_cast<int>(i);
  return -1;
}

int FiniteMarket::leaf_position(const std::string& id) const {
  for (std::size_t i = 0; i < leaves_.size(); ++i)
    if (nodes_[leaves_[i]].id == id) return static_cast<int>(i);
  return -1;
}

FiniteMarket FiniteMarket::from_json(const nlohmann::json& doc) {
  if (!doc.contains("horizon") || !doc.contains("assets") || !doc.contains("nodes"))
    throw std::invalid_argument("market file needs fields horizon, assets, nodes");
  int horizon = doc.at("horizon").get<int>();
  int assets = doc.at("assets").get<int>();
  std::vector<MarketNode> nodes;
  std::map<std::string, int> by_id;
  for (const auto& jn : doc.at("nodes")) {
    MarketNode nd;
    nd.id = jn.at("id").get<std::string>();
    if (jn.contains("parent") && !jn.at("parent").is_null()) {
      std::string pid = jn.at("parent").get<std::string>();
      auto it = by_id.find(pid);
      if (it == by_id.end())
        throw std::invalid_argument("node '" + nd.id + "' references parent '" + pid +
                                    "' before it is declared");
      nd.parent = it->second;
    }
    nd.prob = jn.contains("prob") ? jn.at("prob").get<double>() : 1.0;
    nd.prices = jn.at("prices").get<std::vector<double>>();
    by_id.emplace(nd.id, static_cast<int>(nodes.size()));
    nodes.push_back(std::move(nd));
  }
  return FiniteMarket(horizon, assets, std::move(nodes));
}

FiniteMarket FiniteMarket::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open market file '" + path + "'");
  nlohmann::json doc = nlohmann::json::parse(in);
  return from_json(doc);
}

nlohmann::json FiniteMarket::to_json() const {
  nlohmann::json doc;
  doc["horizon"] = horizon_;
  doc["assets"] = assets_;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& nd : nodes_) {
    nlohmann::json jn;
    jn["id"] = nd.id;
    if (nd.parent < 0)
      jn["parent"] = nullptr;
    else
      jn["parent"] = nodes_[nd.parent].id;
    jn["prob"] = nd.prob;
    jn["prices"] = nd.prices;
    doc["nodes"].push_back(std::move(jn));
  }
  return doc;
}

FiniteMarket make_single_period(const std::vector<double>& probs,
                                const std::vector<double>& terminal, double s0) {
  if (probs.size() != terminal.size())
    throw std::invalid_argument("probability and terminal price counts differ");
  std::vector<MarketNode> nodes;
  nodes.push_back({"root", -1, 1.0, {s0}, 0, {}});
  for (std::size_t i = 0; i < probs.size(); ++i)
    nodes.push_back({"w" + std::to_string(i), 0, probs[i], {terminal[i]}, 0, {}});
  return FiniteMarket(1, 1, std::move(nodes));
}

FiniteMarket make_binomial_tree(double p, double up, double down, int periods) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binomial branch probability must be in (0,1)");
  if (!(up > down)) throw std::invalid_argument("binomial needs up > down");
  if (periods < 1 || periods > 16) throw std::invalid_argument("binomial periods must be in [1,16]");
  std::vector<MarketNode> nodes;
  nodes.push_back({"r", -1, 1.0, {0.0}, 0, {}});
  std::vector<int> level{0};
  for (int t = 0; t < periods; ++t) {
    std::vector<int> next;
    for (int v : level) {
      double s = nodes[v].prices[0];
      next.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({nodes[v].id + "u", v, p, {s + up}, 0, {}});
      next.push_back(static_cast<int>(nodes.size()));
      nodes.push_back({nodes[v].id + "d", v, 1.0 - p, {s + down}, 0, {}});
    }
    level = std::move(next);
  }
  return FiniteMarket(periods, 1, std::move(nodes));
}

std::vector<double> GainsBasis::apply(const std::vector<double>& xi) const {
  if (xi.size() != columns.size())
    throw std::invalid_argument("strategy coordinate count does not match basis columns");
  std::vector<double> f(num_leaves, 0.0);
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (xi[k] == 0.0) continue;
    for (std::size_t l = 0; l < num_leaves; ++l) f[l] += xi[k] * columns[k][l];
  }
  return f;
}

GainsBasis gains_basis(const FiniteMarket& market) {
  GainsBasis basis;
  basis.num_leaves = market.num_leaves();
  std::map<std::pair<int, int>, std::size_t> col_of;
  for (std::size_t i = 0; i < market.nodes().size(); ++i) {
    if (market.node(static_cast<int>(i)).children.empty()) continue;
    for (int j = 0; j < market.assets(); ++j) {
      col_of[{static_cast<int>(i), j}] = basis.columns.size();
      basis.columns.emplace_back(basis.num_leaves, 0.0);
      basis.keys.push_back({static_cast<int>(i), j});
    }
  }
  for (std::size_t li = 0; li < market.leaves().size(); ++li) {
    int v = market.leaves()[li];
    while (market.node(v).parent >= 0) {
      int parent = market.node(v).parent;
      for (int j = 0; j < market.assets(); ++j) {
        std::size_t col = col_of.at({parent, j});
        basis.columns[col][li] = market.node(v).prices[j] - market.node(parent).prices[j];
      }
      v = parent;
    }
  }
  return basis;
}

SeparatingSet::SeparatingSet(const FiniteMarket& market)
    : basis_(gains_basis(market)), space_(market.leaf_space()) {}

bool SeparatingSet::contains(const std::vector<double>& q, double tol) const {
  if (q.size() != basis_.num_leaves) return false;
  double total = 0.0;
  for (double v : q) {
    if (v < -tol) return false;
    total += v;
  }
  if (std::abs(total - 1.0) > tol) return false;
  for (const auto& col : basis_.columns) {
    double dot = 0.0;
    for (std::size_t l = 0; l < q.size(); ++l) dot += col[l] * q[l];
    if (std::abs(dot) > tol) return false;
  }
  return true;
}

std::vector<std::vector<double>> SeparatingSet::vertices(std::size_t max_leaves) const {
  const std::size_t L = basis_.num_leaves;
  if (L > max_leaves)
    throw std::invalid_argument("separating-set vertex enumeration limited to " +
                                std::to_string(max_leaves) + " leaves");
  const std::size_t rows = basis_.num_columns() + 1;
  Eigen::MatrixXd A(rows, L);
  Eigen::VectorXd b(rows);
  for (std::size_t l = 0; l < L; ++l) A(0, static_cast<int>(l)) = 1.0;
  b(0) = 1.0;
  for (std::size_t k = 0; k < basis_.num_columns(); ++k) {
    for (std::size_t l = 0; l < L; ++l)
      A(static_cast<int>(k + 1), static_cast<int>(l)) = basis_.columns[k][l];
    b(static_cast<int>(k + 1)) = 0.0;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> full_qr(A);
  full_qr.setThreshold(1e-10);
  const int rank = static_cast<int>(full_qr.rank());

  std::vector<std::vector<double>> verts;
  std::set<std::vector<long long>> seen;
  std::vector<int> comb(rank);
  for (int i = 0; i < rank; ++i) comb[i] = i;
  auto advance = [&]() {
    int i = rank - 1;
    while (i >= 0 && comb[i] == static_cast<int>(L) - rank + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < rank; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };
  if (rank == 0 || static_cast<int>(L) < rank) return verts;
  do {
    Eigen::MatrixXd Aj(rows, rank);
    for (int c = 0; c < rank; ++c) Aj.col(c) = A.col(comb[c]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Aj);
    qr.setThreshold(1e-10);
    if (qr.rank() < rank) continue;
    Eigen::VectorXd xj = qr.solve(b);
    if ((Aj * xj - b).lpNorm<Eigen::Infinity>() > 1e-8) continue;
    bool feasible = true;
    for (int c = 0; c < rank && feasible; ++c) feasible = xj(c) >= -1e-9;
    if (!feasible) continue;
    std::vector<double> q(L, 0.0);
    for (int c = 0; c < rank; ++c) q[comb[c]] = std::max(0.0, xj(c));
    std::vector<long long> key(L);
    for (std::size_t l = 0; l < L; ++l) key[l] = llround(q[l] * 1e9);
    if (seen.insert(key).second) verts.push_back(std::move(q));
  } while (advance());
  return verts;
}

EmmResult find_emm(const FiniteMarket& market) {
  GainsBasis basis = gains_basis(market);
  const std::size_t L = basis.num_leaves;
  LinearProgram lp;
  lp.maximize = true;
  lp.objective.assign(L + 1, 0.0);
  lp.objective[L] = 1.0;  // t
  lp.lower.assign(L + 1, 0.0);
  lp.upper.assign(L + 1, 1.0);
  lp.lower[L] = -1.0;
  {
    std::vector<double> row(L + 1, 1.0);
    row[L] = 0.0;
    lp.add_eq(std::move(row), 1.0);
  }
  for (const auto& col : basis.columns) {
    std::vector<double> row(L + 1, 0.0);
    for (std::size_t l = 0; l < L; ++l) row[l] = col[l];
    lp.add_eq(std::move(row), 0.0);
  }
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> row(L + 1, 0.0);
    row[l] = -1.0;
    row[L] = 1.0;  // t - q_l <= 0
    lp.add_ineq(std::move(row), 0.0);
  }
  auto sol = lp_solve(lp);
  EmmResult res;
  if (sol.status != LpStatus::Optimal) return res;  // cannot happen: q = P, t = min p is feasible
  res.min_prob = sol.objective;
  if (sol.objective <= 1e-10) return res;
  res.found = true;
  res.q.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(L));
  res.density.resize(L);
  for (std::size_t l = 0; l < L; ++l) res.density[l] = res.q[l] / market.leaf_space().prob(l);
  return res;
}

NaResult check_na(const FiniteMarket& market, std::size_t exact_max_leaves) {
  GainsBasis basis = gains_basis(market);
  const std::size_t L = basis.num_leaves;
  const std::size_t m = basis.num_columns();
  NaResult res;
  if (m == 0) {  // constant prices: K = {0}
    res.no_arbitrage = true;
    return res;
  }
  // variables: xi (free), f (boxed); f = B xi
  LinearProgram lp;
  lp.maximize = true;
  lp.objective.assign(m + L, 0.0);
  for (std::size_t l = 0; l < L; ++l) lp.objective[m + l] = market.leaf_space().prob(l);
  lp.lower.assign(m + L, -LinearProgram::inf());
  lp.upper.assign(m + L, LinearProgram::inf());
  for (std::size_t l = 0; l < L; ++l) {
    lp.lower[m + l] = 0.0;
    lp.upper[m + l] = 1.0;
  }
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> row(m + L, 0.0);
    for (std::size_t k = 0; k < m; ++k) row[k] = basis.columns[k][l];
    row[m + l] = -1.0;
    lp.add_eq(std::move(row), 0.0);
  }
  auto sol = lp_solve(lp);
  res.lp_gain = sol.status == LpStatus::Optimal ? sol.objective : 0.0;
  res.no_arbitrage = res.lp_gain <= 1e-9;
  if (res.no_arbitrage) return res;

  res.strategy.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(m));
  res.payoff.assign(sol.x.begin() + static_cast<long>(m), sol.x.end());
  if (L <= exact_max_leaves) {
    auto exact = lp_solve_exact(lp);
    if (exact.status == LpStatus::Optimal && exact.objective > 0) {
      res.exact = true;
      res.exact_strategy.assign(exact.x.begin(), exact.x.begin() + static_cast<long>(m));
      res.exact_payoff.assign(exact.x.begin() + static_cast<long>(m), exact.x.end());
      for (std::size_t k = 0; k < m; ++k) res.strategy[k] = static_cast<double>(res.exact_strategy[k]);
      for (std::size_t l = 0; l < L; ++l) res.payoff[l] = static_cast<double>(res.exact_payoff[l]);
    }
  }
  return res;
}

ExactArbitrageCheck verify_arbitrage_exact(const FiniteMarket& market,
                                           const std::vector<Rational>& strategy) {
  GainsBasis basis = gains_basis(market);
  ExactArbitrageCheck check;
  if (strategy.size() != basis.num_columns())
    throw std::invalid_argument("strategy coordinate count does not match basis columns");
  const std::size_t L = basis.num_leaves;
  std::vector<Rational> f(L, Rational(0));
  for (std::size_t k = 0; k < basis.num_columns(); ++k)
    for (std::size_t l = 0; l < L; ++l) f[l] += strategy[k] * Rational(basis.columns[k][l]);
  check.nonnegative = true;
  Rational mass(0);
  for (std::size_t l = 0; l < L; ++l) {
    if (f[l] < 0) check.nonnegative = false;
    mass += Rational(market.leaf_space().prob(l)) * f[l];
  }
  check.positive_mass = mass > 0;
  return check;
}

InCResult in_C(const FiniteMarket& market, const std::vector<double>& f) {
  market.leaf_space().require_length(f);
  GainsBasis basis = gains_basis(market);
  const std::size_t L = basis.num_leaves;
  const std::size_t m = basis.num_columns();
  InCResult res;
  // min sum u  s.t.  u >= f - B xi, u >= 0
  LinearProgram lp;
  lp.objective.assign(m + L, 0.0);
  for (std::size_t l = 0; l < L; ++l) lp.objective[m + l] = 1.0;
  lp.lower.assign(m + L, -LinearProgram::inf());
  lp.upper.assign(m + L, LinearProgram::inf());
  for (std::size_t l = 0; l < L; ++l) lp.lower[m + l] = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> row(m + L, 0.0);
    for (std::size_t k = 0; k < m; ++k) row[k] = basis.columns[k][l];
    row[m + l] = 1.0;  // B xi + u >= f
    for (auto& v : row) v = -v;
    lp.add_ineq(std::move(row), -f[l]);
  }
  auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) return res;  // feasible by construction
  res.shortfall = sol.objective;
  res.member = sol.objective <= 1e-9;
  if (res.member) {
    std::vector<double> xi(sol.x.begin(), sol.x.begin() + static_cast<long>(m));
    res.dominating = basis.apply(xi);
    res.slack.resize(L);
    for (std::size_t l = 0; l < L; ++l) res.slack[l] = res.dominating[l] - f[l];
  }
  return res;
}

bool k1_membership(const FiniteMarket& market, const std::vector<double>& f) {
  market.leaf_space().require_length(f);
  for (double v : f)
    if (v < -1.0 - 1e-12) return false;
  GainsBasis basis = gains_basis(market);
  const std::size_t L = basis.num_leaves;
  const std::size_t m = basis.num_columns();
  if (m == 0) {
    for (double v : f)
      if (std::abs(v) > 1e-9) return false;
    return true;
  }
  Eigen::MatrixXd B(L, m);
  Eigen::VectorXd rhs(L);
  for (std::size_t l = 0; l < L; ++l) {
    rhs(static_cast<int>(l)) = f[l];
    for (std::size_t k = 0; k < m; ++k) B(static_cast<int>(l), static_cast<int>(k)) = basis.columns[k][l];
  }
  Eigen::VectorXd xi = B.colPivHouseholderQr().solve(rhs);
  return (B * xi - rhs).lpNorm<Eigen::Infinity>() <= 1e-9;
}

}  // namespace ftaplab
