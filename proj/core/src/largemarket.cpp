#include "ftaplab/largemarket.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <numeric>
#include <thread>

#include "ftaplab/convex.hpp"
#include "ftaplab/linprog.hpp"

namespace ftaplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int thread_cap() {
  if (const char* env = std::getenv("FTAPLAB_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

// Deterministic per-index fan-out; results must be written by index.
void parallel_for(int count, const std::function<void(int)>& fn) {
  int cap = std::min(thread_cap(), count);
  if (cap <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  for (int t = 0; t < cap; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<double> leaf_measure(const FiniteMarket& market, const DensityVector& density) {
  std::vector<double> q(market.num_leaves());
  for (std::size_t l = 0; l < q.size(); ++l) q[l] = market.leaf_space().prob(l) * density[l];
  return q;
}

}  // namespace

MarketFamily MarketFamily::explicit_list(std::vector<FiniteMarket> markets, int prefix) {
  if (markets.empty()) throw std::invalid_argument("explicit family needs at least one market");
  MarketFamily f;
  f.kind_ = Kind::Explicit;
  f.markets_ = std::move(markets);
  f.prefix_ = prefix > 0 ? prefix : static_cast<int>(f.markets_.size());
  bool all_equal = true;
  for (std::size_t i = 1; i < f.markets_.size(); ++i)
    all_equal = all_equal && f.markets_[i].to_json() == f.markets_[0].to_json();
  f.constant_ = all_equal;
  return f;
}

MarketFamily MarketFamily::klein(double alpha, int prefix) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("klein alpha must be in (0,1)");
  MarketFamily f;
  f.kind_ = Kind::Klein;
  f.alpha_ = alpha;
  f.prefix_ = prefix;
  f.constant_ = true;
  return f;
}

MarketFamily MarketFamily::binomial(double p, double up, double down, int periods, int prefix) {
  MarketFamily f;
  f.kind_ = Kind::Binomial;
  f.p_ = p;
  f.up_ = up;
  f.down_ = down;
  f.periods_ = periods;
  f.prefix_ = prefix;
  f.constant_ = true;
  f.markets_.push_back(make_binomial_tree(p, up, down, periods));
  return f;
}

MarketFamily MarketFamily::custom(std::function<FiniteMarket(int)> rule, bool constant_in_n,
                                  int prefix) {
  MarketFamily f;
  f.kind_ = Kind::Custom;
  f.rule_ = std::move(rule);
  f.constant_ = constant_in_n;
  f.prefix_ = prefix;
  return f;
}

FiniteMarket MarketFamily::market(int n) const {
  if (n < 1) throw std::invalid_argument("family index n starts at 1");
  switch (kind_) {
    case Kind::Explicit:
      if (static_cast<std::size_t>(n) > markets_.size())
        throw std::invalid_argument("explicit family has no market " + std::to_string(n));
      return markets_[static_cast<std::size_t>(n - 1)];
    case Kind::Klein:
      return make_single_period({alpha_, 1.0 - alpha_}, {1.0, 0.0});
    case Kind::Binomial:
      return markets_[0];
    case Kind::Custom:
      return rule_(n);
  }
  throw std::logic_error("unreachable");
}

MarketFamily MarketFamily::from_json(const nlohmann::json& doc, const std::string& base_dir) {
  std::string kind = doc.at("kind").get<std::string>();
  int prefix = doc.contains("prefix") ? doc.at("prefix").get<int>() : 10;
  if (kind == "klein") return klein(doc.at("params").at("alpha").get<double>(), prefix);
  if (kind == "binomial") {
    const auto& p = doc.at("params");
    return binomial(p.at("p").get<double>(), p.at("up").get<double>(), p.at("down").get<double>(),
                    p.at("periods").get<int>(), prefix);
  }
  if (kind == "explicit") {
    std::vector<FiniteMarket> markets;
    if (doc.contains("explicit")) {
      for (const auto& entry : doc.at("explicit")) {
        std::string path = entry.get<std::string>();
        if (!base_dir.empty() && !path.empty() && path[0] != '/') path = base_dir + "/" + path;
        markets.push_back(FiniteMarket::load(path));
      }
    } else if (doc.contains("markets")) {
      for (const auto& entry : doc.at("markets")) markets.push_back(FiniteMarket::from_json(entry));
    }
    return explicit_list(std::move(markets), prefix);
  }
  throw std::invalid_argument("unknown family kind '" + kind + "'");
}

nlohmann::json MarketFamily::to_json() const {
  nlohmann::json doc;
  doc["prefix"] = prefix_;
  switch (kind_) {
    case Kind::Klein:
      doc["kind"] = "klein";
      doc["params"] = {{"alpha", alpha_}};
      break;
    case Kind::Binomial:
      doc["kind"] = "binomial";
      doc["params"] = {{"p", p_}, {"up", up_}, {"down", down_}, {"periods", periods_}};
      break;
    case Kind::Explicit: {
      doc["kind"] = "explicit";
      doc["markets"] = nlohmann::json::array();
      for (const auto& m : markets_) doc["markets"].push_back(m.to_json());
      break;
    }
    case Kind::Custom:
      throw std::invalid_argument("custom-rule families are not serializable");
  }
  return doc;
}

MeasureSeq identity_measures(const MarketFamily& family, int N) {
  MeasureSeq seq;
  seq.constant_rule = true;
  for (int n = 1; n <= N; ++n)
    seq.densities.push_back(DensityVector::ones(family.market(n).leaf_space()));
  return seq;
}

FractionalSet extremal_min_mass(const std::vector<double>& objective_measure,
                                const std::vector<double>& constraint_measure, double eps) {
  if (objective_measure.size() != constraint_measure.size())
    throw std::invalid_argument("measure length mismatch");
  if (!(eps > 0.0)) throw std::invalid_argument("extremal_min_mass needs eps > 0");
  const std::size_t n = objective_measure.size();
  FractionalSet out;
  out.w.assign(n, 0.0);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n; ++i)
    if (constraint_measure[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return objective_measure[a] * constraint_measure[b] <
           objective_measure[b] * constraint_measure[a];
  });
  double mass = 0.0;
  for (std::size_t i : order) {
    double need = eps - mass;
    if (need <= 0.0) break;
    double take = std::min(1.0, need / constraint_measure[i]);
    out.w[i] = take;
    out.value += objective_measure[i] * take;
    mass += constraint_measure[i] * take;
  }
  if (mass < eps - 1e-12) out.value = kInf;
  return out;
}

YoungDomination young_domination(const MarketFamily& family, const MeasureSeq& Q, int N,
                                 Direction dir) {
  YoungDomination out;
  if (Q.size() < N) throw std::invalid_argument("measure sequence shorter than the prefix");
  auto moment = [&](double p) {
    double worst = 0.0;
    for (int n = 1; n <= N; ++n) {
      const auto& space = Q.at(n).space();
      double s = 0.0;
      for (std::size_t l = 0; l < space.size(); ++l) {
        double base, rho;
        if (dir == Direction::QGivenP) {
          base = space.prob(l);
          rho = Q.at(n)[l];
        } else {
          base = space.prob(l) * Q.at(n)[l];  // the Q-measure
          if (base <= 1e-300) return kInf;    // P charges an atom Q does not
          rho = 1.0 / Q.at(n)[l];
        }
        s += base * std::pow(rho, p) / p;
      }
      worst = std::max(worst, s);
    }
    return worst;
  };
  for (double p = 8.0; p > 1.0001; p -= 0.05) {
    double m = moment(p);
    if (m <= 1.0) {
      out.found = true;
      out.exponent = p;
      out.witness = YoungFunction::power(p);
      out.worst_moment = m;
      out.certified_all_n = family.constant_in_n() && Q.constant_rule;
      return out;
    }
  }
  return out;
}

ContiguityProfile contiguity_profile(const MarketFamily& family, const MeasureSeq& Q, int N) {
  if (Q.size() < N) throw std::invalid_argument("measure sequence shorter than the prefix");
  ContiguityProfile prof;
  for (int j = 1; j <= 8; ++j) prof.eps_grid.push_back(std::pow(2.0, -j));
  for (int k = 0; k <= 8; ++k) prof.kappa_grid.push_back(std::pow(2.0, k - 1));
  prof.delta_q_given_p.assign(prof.eps_grid.size(), kInf);
  prof.delta_p_given_q.assign(prof.eps_grid.size(), kInf);
  prof.ui_tail.assign(prof.kappa_grid.size(), 0.0);

  std::vector<std::vector<double>> dqp(static_cast<std::size_t>(N)),
      dpq(static_cast<std::size_t>(N)), ui(static_cast<std::size_t>(N));
  parallel_for(N, [&](int idx) {
    int n = idx + 1;
    FiniteMarket market = family.market(n);
    std::vector<double> p = market.leaf_space().probs();
    std::vector<double> q = leaf_measure(market, Q.at(n));
    auto& a = dqp[static_cast<std::size_t>(idx)];
    auto& b = dpq[static_cast<std::size_t>(idx)];
    auto& u = ui[static_cast<std::size_t>(idx)];
    for (double eps : prof.eps_grid) {
      a.push_back(extremal_min_mass(p, q, eps).value);  // min P-mass with Q-mass >= eps
      b.push_back(extremal_min_mass(q, p, eps).value);  // mirror
    }
    for (double kappa : prof.kappa_grid) {
      double s = 0.0;
      for (std::size_t l = 0; l < p.size(); ++l) {
        double rho = Q.at(n)[l];
        if (rho > kappa) s += p[l] * rho;
      }
      u.push_back(s);
    }
  });
  for (int idx = 0; idx < N; ++idx) {
    for (std::size_t e = 0; e < prof.eps_grid.size(); ++e) {
      prof.delta_q_given_p[e] =
          std::min(prof.delta_q_given_p[e], dqp[static_cast<std::size_t>(idx)][e]);
      prof.delta_p_given_q[e] =
          std::min(prof.delta_p_given_q[e], dpq[static_cast<std::size_t>(idx)][e]);
    }
    for (std::size_t k = 0; k < prof.kappa_grid.size(); ++k)
      prof.ui_tail[k] = std::max(prof.ui_tail[k], ui[static_cast<std::size_t>(idx)][k]);
  }
  prof.young_witness = young_domination(family, Q, N, Direction::QGivenP);
  prof.certified_all_n = family.constant_in_n() && Q.constant_rule;
  return prof;
}

namespace {

// Feasibility of {xi : (B xi)_l >= floor_l for all l}; returns the strategy.
bool floor_feasible(const GainsBasis& basis, const std::vector<double>& floors,
                    std::vector<double>* xi_out) {
  const std::size_t m = basis.num_columns();
  const std::size_t L = basis.num_leaves;
  if (m == 0) {
    for (double f : floors)
      if (f > 0.0) return false;
    if (xi_out) xi_out->clear();
    return true;
  }
  LinearProgram lp;
  lp.objective.assign(m, 0.0);
  lp.lower.assign(m, -LinearProgram::inf());
  lp.upper.assign(m, LinearProgram::inf());
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<double> row(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) row[k] = -basis.columns[k][l];
    lp.add_ineq(std::move(row), -floors[l]);
  }
  auto sol = lp_solve(lp);
  if (sol.status != LpStatus::Optimal) return false;
  if (xi_out) *xi_out = sol.x;
  return true;
}

// max P(A) over nonempty subsets A such that some strategy clears `level`
// on A and `floor_c` everywhere. Exhaustive over subsets, best mass first.
struct MaskSearch {
  double prob = 0.0;
  unsigned mask = 0;
  std::vector<double> strategy;
  bool found = false;
};

MaskSearch best_mass_mask(const FiniteMarket& market, const GainsBasis& basis, double floor_c,
                          double level, std::size_t enum_limit) {
  MaskSearch out;
  const std::size_t L = basis.num_leaves;
  if (L > enum_limit) {
    // Heuristic fallback: LP relaxation with fractional membership, then one
    // verification of the rounded set. Used only for "not found" style
    // evidence, never to certify absence.
    const std::size_t m = basis.num_columns();
    if (m == 0) return out;
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
      for (std::size_t k = 0; k < m; ++k) row[k] = -basis.columns[k][l];
      lp.add_ineq(row, -floor_c);  // B xi >= floor
      for (std::size_t k = 0; k < m; ++k) row[k] = -basis.columns[k][l] / std::max(level, 1e-9);
      row[m + l] = 1.0;  // t_l <= (B xi)/level
      lp.add_ineq(std::move(row), 0.0);
    }
    auto sol = lp_solve(lp);
    if (sol.status != LpStatus::Optimal) return out;
    std::vector<double> floors(L, floor_c);
    unsigned mask = 0;
    for (std::size_t l = 0; l < L; ++l)
      if (sol.x[m + l] >= 0.5) {
        mask |= 1u << l;
        floors[l] = level;
      }
    if (mask == 0) return out;
    std::vector<double> xi;
    if (!floor_feasible(basis, floors, &xi)) return out;
    out.found = true;
    out.mask = mask;
    out.strategy = std::move(xi);
    for (std::size_t l = 0; l < L; ++l)
      if (mask & (1u << l)) out.prob += market.leaf_space().prob(l);
    return out;
  }

  std::vector<unsigned> masks;
  for (unsigned mask = 1; mask < (1u << L); ++mask) masks.push_back(mask);
  auto mass = [&](unsigned mask) {
    double s = 0.0;
    for (std::size_t l = 0; l < L; ++l)
      if (mask & (1u << l)) s += market.leaf_space().prob(l);
    return s;
  };
  std::stable_sort(masks.begin(), masks.end(),
                   [&](unsigned a, unsigned b) { return mass(a) > mass(b); });
  for (unsigned mask : masks) {
    std::vector<double> floors(L, floor_c);
    for (std::size_t l = 0; l < L; ++l)
      if (mask & (1u << l)) floors[l] = level;
    std::vector<double> xi;
    if (floor_feasible(basis, floors, &xi)) {
      out.found = true;
      out.mask = mask;
      out.prob = mass(mask);
      out.strategy = std::move(xi);
      return out;
    }
  }
  return out;
}

std::vector<double> truncate_claim(const GainsBasis& basis, const std::vector<double>& xi,
                                   double level) {
  std::vector<double> f = basis.apply(xi);
  for (double& v : f) v = std::min(v, level);
  return f;
}

enum class DetectorKind { AA1, AA2, SAA, AFLBR };

const char* detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::AA1:
      return "AA1";
    case DetectorKind::AA2:
      return "AA2";
    case DetectorKind::SAA:
      return "SAA";
    case DetectorKind::AFLBR:
      return "AFLBR";
  }
  return "?";
}

// Closed-form verdicts for constant families: a zero gains cone excludes
// everything, and single-market arbitrage settles AA1/AFLBR by scaling.
// AA2/SAA reduce to a uniformly positive gains payoff.
std::optional<Verdict> constant_family_verdict(const MarketFamily& family, DetectorKind kind,
                                               const DetectorParams& params) {
  if (!family.constant_in_n()) return std::nullopt;
  FiniteMarket market = family.market(1);
  GainsBasis basis = gains_basis(market);
  bool zero_basis = true;
  for (const auto& col : basis.columns)
    for (double v : col) zero_basis = zero_basis && v == 0.0;
  Verdict verdict;
  verdict.condition = detector_name(kind);
  if (zero_basis) {
    verdict.status = VerdictStatus::CertifiedAbsent;
    verdict.note = "gains cone is {0} on the constant family";
    return verdict;
  }

  if (kind == DetectorKind::AA2 || kind == DetectorKind::SAA) {
    // max t with B xi >= t and |xi| <= 1; positive iff a uniformly positive
    // payoff exists, which is what a probability -> 1 level demands on a
    // constant finite family.
    const std::size_t m = basis.num_columns();
    const std::size_t L = basis.num_leaves;
    LinearProgram lp;
    lp.maximize = true;
    lp.objective.assign(m + 1, 0.0);
    lp.objective[m] = 1.0;
    lp.lower.assign(m + 1, -1.0);
    lp.upper.assign(m + 1, 1.0);
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> row(m + 1, 0.0);
      for (std::size_t k = 0; k < m; ++k) row[k] = -basis.columns[k][l];
      row[m] = 1.0;
      lp.add_ineq(std::move(row), 0.0);
    }
    auto sol = lp_solve(lp);
    if (sol.status == LpStatus::Optimal && sol.objective > 1e-9) {
      verdict.status = VerdictStatus::Found;
      verdict.level = sol.objective;
      std::vector<double> xi(sol.x.begin(), sol.x.begin() + static_cast<long>(m));
      for (int k = 1; k <= params.prefix; ++k) {
        DetectorCertificate cert;
        cert.k = k;
        cert.n = k;
        cert.bound = kind == DetectorKind::SAA ? 1.0 / k : 1.0;
        cert.level = sol.objective;
        cert.prob = 1.0;
        cert.strategy = xi;
        cert.claim = truncate_claim(basis, xi, sol.objective);
        verdict.certificates.push_back(std::move(cert));
      }
      verdict.note = "uniformly positive gains payoff on the constant family";
    } else {
      verdict.status = VerdictStatus::CertifiedAbsent;
      verdict.note = "no uniformly positive gains payoff; probability cannot approach 1";
    }
    return verdict;
  }

  // AA1 / AFLBR on a constant family reduce to single-market arbitrage.
  NaResult na = check_na(market);
  if (na.no_arbitrage) return std::nullopt;  // leave to the prefix scan
  MaskSearch base = best_mass_mask(market, basis, 0.0, 1.0, params.enum_limit);
  if (!base.found) return std::nullopt;
  verdict.status = VerdictStatus::Found;
  verdict.level = base.prob;
  for (int k = 1; k <= params.prefix; ++k) {
    DetectorCertificate cert;
    cert.k = k;
    cert.n = k;
    if (kind == DetectorKind::AA1) {
      double Lk = static_cast<double>(k);
      cert.bound = 1.0 / k;
      cert.level = Lk;
      cert.strategy = base.strategy;
      for (double& v : cert.strategy) v *= Lk;
      cert.claim = truncate_claim(basis, cert.strategy, Lk);
    } else {
      double alpha = std::min(base.prob, 1.0);
      cert.bound = 1.0;
      cert.level = alpha;
      cert.strategy = base.strategy;
      for (double& v : cert.strategy) v *= alpha;
      cert.claim = truncate_claim(basis, cert.strategy, alpha);
    }
    cert.prob = base.prob;
    verdict.certificates.push_back(std::move(cert));
  }
  verdict.note = "single-market arbitrage scaled along the schedule";
  return verdict;
}

Verdict prefix_scan(const MarketFamily& family, DetectorKind kind, const DetectorParams& params) {
  Verdict verdict;
  verdict.condition = detector_name(kind);
  const int N = params.prefix;

  if (kind == DetectorKind::AA1 || kind == DetectorKind::SAA) {
    bool all_ok = true;
    double level = kInf;
    for (int k = 1; k <= N; ++k) {
      FiniteMarket market = family.market(k);
      GainsBasis basis = gains_basis(market);
      double ck = 1.0 / k;
      double target = kind == DetectorKind::AA1 ? static_cast<double>(k)  // L_k
                                                : params.alpha_grid.front();
      MaskSearch best = best_mass_mask(market, basis, -ck, target, params.enum_limit);
      verdict.per_k_values.push_back(best.found ? best.prob : 0.0);
      if (!best.found || best.prob < params.found_threshold) {
        all_ok = false;
        continue;
      }
      level = std::min(level, best.prob);
      DetectorCertificate cert;
      cert.k = k;
      cert.n = k;
      cert.bound = ck;
      cert.level = target;
      cert.prob = best.prob;
      cert.strategy = best.strategy;
      cert.claim = truncate_claim(basis, best.strategy, target);
      verdict.certificates.push_back(std::move(cert));
    }
    if (kind == DetectorKind::SAA && all_ok) {
      // SAA additionally needs the probability to approach 1.
      for (int k = 1; k <= N && all_ok; ++k)
        all_ok = verdict.per_k_values[static_cast<std::size_t>(k - 1)] >= 1.0 - std::pow(2.0, -k);
    }
    verdict.status = all_ok ? VerdictStatus::Found : VerdictStatus::NotFoundOnPrefix;
    if (!all_ok) verdict.certificates.clear();
    verdict.level = all_ok ? level : 0.0;
    return verdict;
  }

  if (kind == DetectorKind::AA2) {
    for (double alpha : params.alpha_grid) {
      bool ok = true;
      std::vector<DetectorCertificate> certs;
      std::vector<double> values;
      for (int k = 1; k <= N && ok; ++k) {
        FiniteMarket market = family.market(k);
        GainsBasis basis = gains_basis(market);
        MaskSearch best = best_mass_mask(market, basis, -1.0, alpha, params.enum_limit);
        double tol = std::pow(2.0, -k);
        values.push_back(best.found ? best.prob : 0.0);
        ok = best.found && best.prob >= 1.0 - tol;
        if (ok) {
          DetectorCertificate cert;
          cert.k = k;
          cert.n = k;
          cert.bound = 1.0;
          cert.level = alpha;
          cert.prob = best.prob;
          cert.strategy = best.strategy;
          cert.claim = truncate_claim(basis, best.strategy, alpha);
          certs.push_back(std::move(cert));
        }
      }
      if (ok) {
        verdict.status = VerdictStatus::Found;
        verdict.level = alpha;
        verdict.certificates = std::move(certs);
        verdict.per_k_values = std::move(values);
        return verdict;
      }
      if (verdict.per_k_values.empty()) verdict.per_k_values = std::move(values);
    }
    verdict.status = VerdictStatus::NotFoundOnPrefix;
    return verdict;
  }

  // AFLBR: level alpha on mass >= alpha within K_1, shortfall below -eps_k
  // only on mass <= tol_k, with eps_k = tol_k = 2^-k.
  for (double alpha : params.alpha_grid) {
    bool ok = true;
    std::vector<DetectorCertificate> certs;
    std::vector<double> values;
    for (int k = 1; k <= N && ok; ++k) {
      FiniteMarket market = family.market(k);
      GainsBasis basis = gains_basis(market);
      const std::size_t L = basis.num_leaves;
      double epsk = std::pow(2.0, -k);
      double tolk = epsk;
      bool found_k = false;
      if (L <= params.enum_limit && L <= 12) {
        auto mass = [&](unsigned mask) {
          double s = 0.0;
          for (std::size_t l = 0; l < L; ++l)
            if (mask & (1u << l)) s += market.leaf_space().prob(l);
          return s;
        };
        for (unsigned amask = 1; amask < (1u << L) && !found_k; ++amask) {
          if (mass(amask) < alpha) continue;
          unsigned rest = ~amask & ((1u << L) - 1);
          // B runs over subsets of the complement, small mass first.
          std::vector<unsigned> bmasks{0u};
          for (unsigned b = rest; b > 0; b = (b - 1) & rest) bmasks.push_back(b);
          std::stable_sort(bmasks.begin(), bmasks.end(),
                           [&](unsigned x, unsigned y) { return mass(x) < mass(y); });
          for (unsigned bmask : bmasks) {
            if (mass(bmask) > tolk) break;
            std::vector<double> floors(L, -epsk);
            for (std::size_t l = 0; l < L; ++l) {
              if (amask & (1u << l)) floors[l] = alpha;
              else if (bmask & (1u << l)) floors[l] = -1.0;
            }
            std::vector<double> xi;
            if (floor_feasible(basis, floors, &xi)) {
              found_k = true;
              values.push_back(mass(amask));
              DetectorCertificate cert;
              cert.k = k;
              cert.n = k;
              cert.bound = 1.0;
              cert.level = alpha;
              cert.prob = mass(amask);
              cert.strategy = xi;
              cert.claim = truncate_claim(basis, xi, alpha);
              certs.push_back(std::move(cert));
              break;
            }
          }
        }
      }
      ok = found_k;
    }
    if (ok) {
      verdict.status = VerdictStatus::Found;
      verdict.level = alpha;
      verdict.certificates = std::move(certs);
      verdict.per_k_values = std::move(values);
      return verdict;
    }
  }
  verdict.status = VerdictStatus::NotFoundOnPrefix;
  return verdict;
}

Verdict detect(const MarketFamily& family, DetectorKind kind, const DetectorParams& params) {
  if (auto certified = constant_family_verdict(family, kind, params)) return *certified;
  return prefix_scan(family, kind, params);
}

}  // namespace

Verdict detect_aa1(const MarketFamily& family, const DetectorParams& params) {
  return detect(family, DetectorKind::AA1, params);
}
Verdict detect_aa2(const MarketFamily& family, const DetectorParams& params) {
  return detect(family, DetectorKind::AA2, params);
}
Verdict detect_saa(const MarketFamily& family, const DetectorParams& params) {
  return detect(family, DetectorKind::SAA, params);
}
Verdict detect_aflbr(const MarketFamily& family, const DetectorParams& params) {
  return detect(family, DetectorKind::AFLBR, params);
}

NamflResult namfl_worstcase(const FiniteMarket& market, const DensityVector& R, double eps,
                            const YoungFunction& F) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::domain_error("namfl_worstcase needs eps in (0,1]");
  if (!(R.space() == market.leaf_space()))
    throw std::invalid_argument("belief density is not indexed by the market's leaf space");
  R.require_probability_density();
  if (!R.is_strictly_positive())
    throw std::invalid_argument("belief density must be strictly positive");

  const std::size_t L = market.num_leaves();
  std::vector<double> rmeas = leaf_measure(market, R);
  const YoungFunction v = F.conjugate();
  ConstrainedClaimSet claims(eps, market.leaf_space());

  SeparatingSet sep(market);
  auto verts = sep.vertices();
  NamflResult res;
  if (verts.empty()) {
    // Total arbitrage: every claim in D^eps is dominated by a gains payoff.
    res.value = 0.0;
    res.free_lunch_signal = true;
    res.worst_w = knap_min(std::vector<double>(L, 0.0), claims).w;
    return res;
  }

  std::vector<std::vector<double>> cone_basis;
  for (const auto& q : verts) {
    std::vector<double> d(L);
    for (std::size_t l = 0; l < L; ++l) d[l] = q[l] / rmeas[l];
    cone_basis.push_back(std::move(d));
  }

  auto weighted = [&](const std::vector<double>& z) {
    std::vector<double> c(L);
    for (std::size_t l = 0; l < L; ++l) c[l] = std::max(0.0, rmeas[l] * z[l]);
    return c;
  };
  ConeObjective obj;
  obj.value = [&](const std::vector<double>& z) {
    double s = -detail::linear_min_over_claims(weighted(z), claims).value;
    for (std::size_t l = 0; l < L; ++l) s += rmeas[l] * v.value(std::max(0.0, z[l]));
    return s;
  };
  obj.subgradient = [&](const std::vector<double>& z) {
    auto knap = detail::linear_min_over_claims(weighted(z), claims);
    std::vector<double> g(L);
    for (std::size_t l = 0; l < L; ++l)
      g[l] = rmeas[l] * (-knap.w[l] + v.derivative(std::max(0.0, z[l])));
    return g;
  };

  ConeMinOptions opts;
  opts.gap_tol = 1e-9;
  auto cone = min_over_cone(obj, cone_basis, opts);
  res.value = cone.value;
  res.free_lunch_signal = cone.value >= -1e-9;

  std::vector<double> zdir = cone.point;
  double znorm = 0.0;
  for (double zl : zdir) znorm += std::abs(zl);
  if (znorm <= 1e-12) {
    // Infimum at the apex: read the worst claim off the flattest generator.
    std::size_t pick = 0;
    double best_drop = kInf;
    for (std::size_t k = 0; k < cone_basis.size(); ++k) {
      double drop = detail::linear_min_over_claims(weighted(cone_basis[k]), claims).value;
      if (drop < best_drop) {
        best_drop = drop;
        pick = k;
      }
    }
    res.worst_w = detail::linear_min_over_claims(weighted(cone_basis[pick]), claims).w;
    res.lambda = 0.0;
  } else {
    auto knap = detail::linear_min_over_claims(weighted(zdir), claims);
    res.worst_w = knap.w;
    res.lambda = 0.0;
    for (std::size_t l = 0; l < L; ++l) res.lambda += rmeas[l] * zdir[l];
    res.q.resize(L);
    for (std::size_t l = 0; l < L; ++l) res.q[l] = rmeas[l] * zdir[l] / res.lambda;
  }

  UtilityProblem prob{market, UtilityFunction::from_young(F), R, res.worst_w};
  res.primal_cross_check = sup_utility_primal(prob).value;
  return res;
}

NaflResult nafl_check(const FiniteMarket& market, double eps, const YoungFunction& F,
                      bool exact_mode) {
  NaflResult res;
  res.exact_mode = exact_mode;
  if (eps > 1.0) {
    res.outcome = NaflOutcome::NoWitness;
    res.lower = kInf;
    res.upper = kInf;
    return res;
  }
  if (!(eps > 0.0)) throw std::domain_error("nafl_check needs eps > 0");

  const auto& space = market.leaf_space();
  const std::size_t L = space.size();
  const YoungFunction G = F.conjugate();
  GainsBasis basis = gains_basis(market);
  const std::size_t m = basis.num_columns();
  ConstrainedClaimSet claims(eps, space);

  double box = 1.0;
  for (std::size_t l = 0; l < L; ++l)
    box = std::max(box, G.value_inverse(1.0 / space.prob(l)));
  box = 2.0 * box + 1.0;

  // Linear oracle over C cap box: min c'f with f <= B xi, -box <= f <= 1+box.
  auto oracle_C = [&](const std::vector<double>& c) {
    LinearProgram lp;
    lp.objective.assign(m + L, 0.0);
    lp.lower.assign(m + L, -LinearProgram::inf());
    lp.upper.assign(m + L, LinearProgram::inf());
    for (std::size_t l = 0; l < L; ++l) {
      lp.objective[m + l] = c[l];
      lp.lower[m + l] = -box;
      lp.upper[m + l] = 1.0 + box;
    }
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<double> row(m + L, 0.0);
      for (std::size_t k = 0; k < m; ++k) row[k] = -basis.columns[k][l];
      row[m + l] = 1.0;  // f - B xi <= 0
      lp.add_ineq(std::move(row), 0.0);
    }
    auto sol = lp_solve(lp);
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error("superreplication oracle failed");
    return std::vector<double>(sol.x.begin() + static_cast<long>(m), sol.x.end());
  };

  auto objective = [&](const std::vector<double>& g) {
    return exact_mode ? polar_gauge(g, space, F) : luxemburg_norm(g, space, G);
  };
  auto gradient = [&](const std::vector<double>& g) {
    std::vector<double> grad(L, 0.0);
    if (exact_mode) {
      auto wit = polar_gauge_witness(g, space, F);
      for (std::size_t l = 0; l < L; ++l) grad[l] = space.prob(l) * wit.h[l];
      return grad;
    }
    double a = luxemburg_norm(g, space, G);
    if (a <= 0.0) return grad;
    double denom = 0.0;
    for (std::size_t l = 0; l < L; ++l)
      denom += space.prob(l) * G.derivative(std::abs(g[l]) / a) * std::abs(g[l]);
    if (denom <= 0.0) return grad;
    for (std::size_t l = 0; l < L; ++l) {
      double s = g[l] >= 0.0 ? 1.0 : -1.0;
      grad[l] = a * space.prob(l) * G.derivative(std::abs(g[l]) / a) * s / denom;
    }
    return grad;
  };

  std::vector<double> f(L, 0.0), w(L, eps);
  double upper = objective([&] {
    std::vector<double> g(L);
    for (std::size_t l = 0; l < L; ++l) g[l] = f[l] - w[l];
    return g;
  }());
  double lower = 0.0;

  for (int it = 0; it < 2000; ++it) {
    std::vector<double> g(L);
    for (std::size_t l = 0; l < L; ++l) g[l] = f[l] - w[l];
    double val = objective(g);
    if (val < upper) upper = val;
    if (val <= 1e-10) {
      upper = val;
      break;
    }
    std::vector<double> grad = gradient(g);
    std::vector<double> vf = oracle_C(grad);
    std::vector<double> neg(L);
    for (std::size_t l = 0; l < L; ++l) neg[l] = -grad[l];
    std::vector<double> vw = detail::linear_min_over_claims(neg, claims).w;
    double gap = 0.0;
    for (std::size_t l = 0; l < L; ++l) gap += grad[l] * ((f[l] - vf[l]) - (w[l] - vw[l]));
    lower = std::max(lower, val - gap);
    double threshold_hi = exact_mode ? 1.0 : 1.0;
    double threshold_lo = exact_mode ? 1.0 : 0.5;
    if (lower > threshold_hi + 1e-9) break;
    if (upper <= threshold_lo - 1e-9) break;
    if (gap <= 1e-8 * std::max(1.0, val)) break;
    auto seg = [&](double t) {
      std::vector<double> gg(L);
      for (std::size_t l = 0; l < L; ++l)
        gg[l] = (f[l] + t * (vf[l] - f[l])) - (w[l] + t * (vw[l] - w[l]));
      return objective(gg);
    };
    auto [t, vseg] = min_convex_1d(seg, 0.0, 1.0);
    if (vseg >= val) break;
    for (std::size_t l = 0; l < L; ++l) {
      f[l] += t * (vf[l] - f[l]);
      w[l] += t * (vw[l] - w[l]);
    }
  }

  res.upper = upper;
  res.lower = lower;
  std::vector<double> g(L);
  for (std::size_t l = 0; l < L; ++l) g[l] = f[l] - w[l];

  const double no_witness_bar = 1.0;
  const double witness_bar = exact_mode ? 1.0 : 0.5;
  if (lower > no_witness_bar + 1e-9) {
    res.outcome = NaflOutcome::NoWitness;
    return res;
  }
  if (upper <= witness_bar + (exact_mode ? -1e-9 : -1e-9) ||
      (exact_mode && upper <= witness_bar + 1e-12)) {
    // Membership of g in the polar is the real claim; re-verify it.
    if (polar_gauge(g, space, F) <= 1.0 + 1e-8) {
      res.outcome = NaflOutcome::Witness;
      res.f = f;
      res.w = w;
      res.g = g;
      return res;
    }
  }
  res.outcome = NaflOutcome::Inconclusive;
  res.lower = std::max(lower, 0.0);
  res.upper = exact_mode ? upper : 2.0 * upper;
  return res;
}

namespace {

double mask_mass(const std::vector<double>& measure, unsigned mask) {
  double s = 0.0;
  for (std::size_t l = 0; l < measure.size(); ++l)
    if (mask & (1u << l)) s += measure[l];
  return s;
}

std::vector<std::size_t> mask_atoms(unsigned mask, std::size_t n) {
  std::vector<std::size_t> atoms;
  for (std::size_t l = 0; l < n; ++l)
    if (mask & (1u << l)) atoms.push_back(l);
  return atoms;
}

}  // namespace

HsSelectResult hs_select(const FiniteProbSpace& space,
                         const std::vector<std::vector<double>>& extreme_measures, double eps,
                         double delta) {
  const std::size_t n = space.size();
  if (n > 15) throw std::invalid_argument("hs_select verification limited to 15 atoms");
  if (extreme_measures.empty()) throw std::invalid_argument("hs_select needs candidate measures");
  if (!(eps > 0.0 && delta > 0.0)) throw std::domain_error("hs_select needs eps, delta > 0");
  for (const auto& q : extreme_measures) {
    space.require_length(q);
    double total = 0.0;
    for (double v : q) {
      if (v < -1e-9) throw std::invalid_argument("candidate measure has a negative atom");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-7)
      throw std::invalid_argument("candidate measure is not normalized");
  }

  const unsigned full = (1u << n) - 1;
  // Hypothesis: every set with P(A) > eps is charged above delta by some member.
  for (unsigned mask = 1; mask <= full; ++mask) {
    if (mask_mass(space.probs(), mask) <= eps) continue;
    double best = 0.0;
    for (const auto& q : extreme_measures) best = std::max(best, mask_mass(q, mask));
    if (!(best > delta)) throw HsHypothesisViolation(mask_atoms(mask, n), best);
  }

  std::vector<unsigned> qualifying;
  for (unsigned mask = 1; mask <= full; ++mask)
    if (mask_mass(space.probs(), mask) > 4.0 * eps) qualifying.push_back(mask);

  HsSelectResult res;
  res.bound = eps * eps * delta / 2.0;
  const std::size_t K = extreme_measures.size();
  res.weights.assign(K, 0.0);
  res.weights[0] = 1.0;
  res.q0 = extreme_measures[0];

  if (!qualifying.empty()) {
    // max m s.t. Q = sum theta_i Q_i, Q(A) >= m for cut sets A.
    std::vector<unsigned> cuts;
    for (int round = 0; round < 400; ++round) {
      LinearProgram lp;
      lp.maximize = true;
      lp.objective.assign(K + 1, 0.0);
      lp.objective[K] = 1.0;
      lp.lower.assign(K + 1, 0.0);
      lp.upper.assign(K + 1, 1.0);
      lp.add_eq([&] {
        std::vector<double> row(K + 1, 1.0);
        row[K] = 0.0;
        return row;
      }(), 1.0);
      for (unsigned cut : cuts) {
        std::vector<double> row(K + 1, 0.0);
        for (std::size_t i = 0; i < K; ++i) row[i] = -mask_mass(extreme_measures[i], cut);
        row[K] = 1.0;  // m - Q(A) <= 0
        lp.add_ineq(std::move(row), 0.0);
      }
      auto sol = lp_solve(lp);
      if (sol.status != LpStatus::Optimal) throw std::runtime_error("hs_select master LP failed");
      std::vector<double> q(n, 0.0);
      for (std::size_t i = 0; i < K; ++i)
        for (std::size_t l = 0; l < n; ++l) q[l] += sol.x[i] * extreme_measures[i][l];
      double m_value = sol.x[K];
      unsigned worst = qualifying[0];
      double worst_mass = kInf;
      for (unsigned mask : qualifying) {
        double qm = mask_mass(q, mask);
        if (qm < worst_mass) {
          worst_mass = qm;
          worst = mask;
        }
      }
      res.weights.assign(sol.x.begin(), sol.x.begin() + static_cast<long>(K));
      res.q0 = q;
      if (worst_mass >= m_value - 1e-10) break;
      cuts.push_back(worst);
    }
  }

  res.worst_mass = kInf;
  for (unsigned mask : qualifying) {
    double qm = mask_mass(res.q0, mask);
    if (qm < res.worst_mass) {
      res.worst_mass = qm;
      res.worst_set = mask_atoms(mask, n);
    }
  }
  if (qualifying.empty()) res.worst_mass = 1.0;
  res.certified = res.worst_mass > res.bound;
  return res;
}

HsSelectResult hs_select(const FiniteProbSpace& space, const SeparatingSet& mset, double eps,
                         double delta) {
  return hs_select(space, mset.vertices(), eps, delta);
}

MixResult mix_sequences(const MarketFamily& family, const std::vector<MeasureSeq>& per_eps,
                        int J) {
  if (J < 1) throw std::invalid_argument("mix_sequences needs J >= 1");
  if (static_cast<int>(per_eps.size()) < J)
    throw std::invalid_argument("mix_sequences needs one measure sequence per eps level");
  const int N = per_eps[0].size();
  for (int j = 0; j < J; ++j)
    if (per_eps[static_cast<std::size_t>(j)].size() != N)
      throw std::invalid_argument("measure sequences have mismatched prefix lengths");

  MixResult res;
  res.remainder = std::pow(2.0, -J);
  res.renormalization = 1.0 / (1.0 - res.remainder);
  res.covering_ok = true;
  res.strictly_positive = true;
  res.mixture.constant_rule = family.constant_in_n();
  for (int j = 0; j < J; ++j)
    res.mixture.constant_rule =
        res.mixture.constant_rule && per_eps[static_cast<std::size_t>(j)].constant_rule;

  std::vector<std::vector<double>> mix_measures(static_cast<std::size_t>(N));
  for (int n = 1; n <= N; ++n) {
    FiniteMarket market = family.market(n);
    SeparatingSet sep(market);
    const std::size_t L = market.num_leaves();
    std::vector<double> mix(L, 0.0);
    for (int j = 1; j <= J; ++j) {
      const auto& density = per_eps[static_cast<std::size_t>(j - 1)].at(n);
      std::vector<double> q = leaf_measure(market, density);
      if (!sep.contains(q))
        throw std::invalid_argument("input sequence j=" + std::to_string(j) +
                                    " lies outside the separating set at n=" + std::to_string(n));
      for (std::size_t l = 0; l < L; ++l) mix[l] += std::pow(2.0, -j) * q[l];
    }
    for (std::size_t l = 0; l < L; ++l) {
      mix[l] *= res.renormalization;
      if (mix[l] <= 1e-15) {
        res.strictly_positive = false;
        bool covered = false;
        for (int j = 1; j <= J; ++j)
          covered = covered ||
                    leaf_measure(market, per_eps[static_cast<std::size_t>(j - 1)].at(n))[l] > 1e-15;
        res.covering_ok = res.covering_ok && covered;
      }
    }
    std::vector<double> density(L);
    for (std::size_t l = 0; l < L; ++l) density[l] = mix[l] / market.leaf_space().prob(l);
    res.mixture.densities.emplace_back(market.leaf_space(), density);
    mix_measures[static_cast<std::size_t>(n - 1)] = std::move(mix);
  }
  if (!res.strictly_positive) res.covering_ok = false;

  // Per-level uniform mass bounds delta_j: P(A) >= 2^-j forces the j-th
  // input to charge A by at least delta_j (fractional extremal, hence valid
  // for sets). They quantify the reverse contiguity direction through
  // P(A) <= 2^-j + (2^{j+1}/delta_j) Q(A), verified exactly atom by atom.
  res.reverse_bound_verified = true;
  for (int j = 1; j <= J; ++j) {
    double dj = kInf;
    for (int n = 1; n <= N; ++n) {
      FiniteMarket market = family.market(n);
      std::vector<double> q = leaf_measure(market, per_eps[static_cast<std::size_t>(j - 1)].at(n));
      dj = std::min(dj,
                    extremal_min_mass(q, market.leaf_space().probs(), std::pow(2.0, -j)).value);
    }
    res.delta_j.push_back(dj);
    double cj = dj > 0.0 ? std::pow(2.0, j + 1) / dj : kInf;
    res.reverse_constant.push_back(cj);
    if (!(dj > 0.0)) {
      res.reverse_bound_verified = false;
      continue;
    }
    for (int n = 1; n <= N; ++n) {
      FiniteMarket market = family.market(n);
      const auto& p = market.leaf_space().probs();
      const auto& q = mix_measures[static_cast<std::size_t>(n - 1)];
      double excess = 0.0;
      for (std::size_t l = 0; l < p.size(); ++l) excess += std::max(0.0, p[l] - cj * q[l]);
      if (excess > std::pow(2.0, -j) + 1e-9) res.reverse_bound_verified = false;
    }
  }
  return res;
}

BuildOutcome build_bicontiguous(const MarketFamily& family, int N, const BuildOptions& options) {
  BuildOutcome out;
  out.eps_grid.clear();
  for (int j = 1; j <= options.J; ++j) out.eps_grid.push_back(std::pow(2.0, -j));

  // Assumption: every market in the prefix has an equivalent martingale measure.
  for (int n = 1; n <= N; ++n) {
    if (!find_emm(family.market(n)).found) {
      out.error = {"assumption (3.1) violated: no equivalent martingale measure at n=" +
                       std::to_string(n),
                   n, 0.0, {}};
      return out;
    }
  }
  if (family.constant_in_n() && N < 1) {
    out.error = {"prefix must cover at least one market", 0, 0.0, {}};
    return out;
  }

  const bool constant = family.constant_in_n();
  const int distinct = constant ? 1 : N;
  std::vector<MeasureSeq> per_eps;

  for (int j = 1; j <= options.J; ++j) {
    double eps = out.eps_grid[static_cast<std::size_t>(j - 1)];

    // Worst-case value and the derived margin delta(eps), F chosen from the
    // grid as the first with a strictly negative worst case everywhere.
    double delta = 0.0;
    const YoungFunction* chosen = nullptr;
    for (const auto& F : options.F_grid) {
      double worst = -kInf;
      for (int n = 1; n <= distinct; ++n) {
        DensityVector R = DensityVector::ones(family.market(n).leaf_space());
        worst = std::max(worst, namfl_worstcase(family.market(n), R, eps, F).value);
      }
      if (worst < -1e-9) {
        chosen = &F;
        delta = -worst / 2.0;
        break;
      }
    }
    if (!chosen) {
      out.error = {"market free lunch: worst-case value is not negative at eps=" +
                       std::to_string(eps),
                   0, eps, {}};
      return out;
    }
    if (j == 1) out.chosen_F = *chosen;
    out.delta_of_eps.push_back(delta);

    double gamma = delta / lambda_bracket(*chosen, delta).lambda1;

    MeasureSeq seq;
    seq.constant_rule = constant;
    std::vector<DensityVector> selected(static_cast<std::size_t>(distinct),
                                        DensityVector());
    std::string stage_error;
    for (int n = 1; n <= distinct; ++n) {
      FiniteMarket market = family.market(n);
      const std::size_t L = market.num_leaves();
      const auto& p = market.leaf_space().probs();
      DensityVector R = DensityVector::ones(market.leaf_space());

      // Candidate sets with P(A) >= eps: exhaustive when small, otherwise
      // ratio-threshold prefixes of the reference order and EMM densities.
      std::vector<std::vector<std::size_t>> candidates;
      if (L <= options.set_enum_limit) {
        for (unsigned mask = 1; mask < (1u << L); ++mask) {
          if (mask_mass(p, mask) >= eps - 1e-12) candidates.push_back(mask_atoms(mask, L));
        }
      } else {
        auto emm = find_emm(market);
        std::vector<std::vector<double>> orders{p};
        if (emm.found) orders.push_back(emm.density);
        for (const auto& key : orders) {
          std::vector<std::size_t> idx(L);
          std::iota(idx.begin(), idx.end(), 0u);
          std::stable_sort(idx.begin(), idx.end(),
                           [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
          std::vector<std::size_t> acc;
          double mass = 0.0;
          for (std::size_t i : idx) {
            acc.push_back(i);
            mass += p[i];
            if (mass >= eps - 1e-12) candidates.push_back(acc);
          }
        }
      }

      std::vector<std::vector<double>> collected;
      try {
        for (const auto& A : candidates) {
          auto sep = separating_from_set(market, R, A, *chosen, delta);
          if (!(sep.q_mass_on_set > gamma) || !(sep.ball_bound <= 1.0 + 1e-7)) {
            std::string names;
            for (auto l : A) names += (names.empty() ? "" : ",") + market.leaf_space().label(l);
            out.error = {"separating measure certification failed at eps=" + std::to_string(eps) +
                             ", n=" + std::to_string(n) + ", set {" + names + "}",
                         n, eps, A};
            return out;
          }
          collected.push_back(sep.q);
        }
        auto hs = hs_select(market.leaf_space(), collected, eps, gamma);
        std::vector<double> density(L);
        for (std::size_t l = 0; l < L; ++l) density[l] = hs.q0[l] / p[l];
        selected[static_cast<std::size_t>(n - 1)] = DensityVector(market.leaf_space(), density);
      } catch (const MarketFreeLunchSignal& sig) {
        out.error = {"market free lunch signal at eps=" + std::to_string(eps) +
                         ", n=" + std::to_string(n) +
                         " (primal value " + std::to_string(sig.primal_value) + ")",
                     n, eps, {}};
        return out;
      } catch (const HsHypothesisViolation& viol) {
        std::string names;
        for (auto l : viol.violating_set)
          names += (names.empty() ? "" : ",") + market.leaf_space().label(l);
        out.error = {"measure selection hypothesis fails at eps=" + std::to_string(eps) +
                         ", n=" + std::to_string(n) + ", set {" + names + "}",
                     n, eps, viol.violating_set};
        return out;
      }
    }
    for (int n = 1; n <= N; ++n)
      seq.densities.push_back(selected[static_cast<std::size_t>(constant ? 0 : n - 1)]);
    per_eps.push_back(std::move(seq));
  }

  MixResult mix = mix_sequences(family, per_eps, options.J);
  if (!mix.strictly_positive) {
    out.error = {"mixture failed to be strictly positive", 0, 0.0, {}};
    return out;
  }
  out.emm_seq = mix.mixture;
  out.remainder = mix.remainder;
  out.profile = contiguity_profile(family, out.emm_seq, N);
  out.domination_forward = young_domination(family, out.emm_seq, N, Direction::QGivenP);
  out.domination_reverse = young_domination(family, out.emm_seq, N, Direction::PGivenQ);
  out.success = true;
  return out;
}

}  // namespace ftaplab
