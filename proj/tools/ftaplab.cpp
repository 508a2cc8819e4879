// ftaplab command-line front end: loads market/family files, dispatches the
// analyses and writes text/CSV reports.
//
// Exit codes: 0 clean verdict, 1 detected arbitrage / free lunch / witness,
// 2 input or usage error.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "ftaplab/largemarket.hpp"
#include "ftaplab/report.hpp"

using namespace ftaplab;
namespace fs = std::filesystem;

namespace {

struct OutputConfig {
  std::string out_dir;
  std::string format = "text";
};

void add_output_flags(CLI::App* cmd, OutputConfig* out) {
  cmd->add_option("--out", out->out_dir, "output directory for reports");
  cmd->add_option("--format", out->format, "text, csv or both")
      ->check(CLI::IsMember({"text", "csv", "both"}));
}

void emit(const AnalysisReport& rep, const OutputConfig& out, const std::string& name) {
  if (out.format == "text" || out.format == "both" || out.out_dir.empty())
    std::cout << rep.to_text();
  if ((out.format == "csv" || out.format == "both") && !out.out_dir.empty()) {
    fs::create_directories(out.out_dir);
    std::ofstream file(out.out_dir + "/" + name + ".csv", std::ios::binary);
    file << rep.to_csv();
  } else if (out.format == "csv" && out.out_dir.empty()) {
    std::cout << rep.to_csv();
  }
}

YoungFunction parse_young(std::string s) {
  if (s.rfind("power:", 0) == 0) return YoungFunction::power(std::stod(s.substr(6)));
  return YoungFunction::from_text(s);
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

MarketFamily load_family(const std::string& path) {
  nlohmann::json doc;
  if (path == "-") {
    doc = nlohmann::json::parse(std::cin);
    return MarketFamily::from_json(doc);
  }
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open family file '" + path + "'");
  doc = nlohmann::json::parse(in);
  return MarketFamily::from_json(doc, fs::path(path).parent_path().string());
}

std::vector<double> parse_claim(const FiniteMarket& market, const std::string& leaves,
                                const std::string& values) {
  const std::size_t L = market.num_leaves();
  if (!values.empty()) {
    auto w = parse_doubles(values);
    market.leaf_space().require_length(w);
    return w;
  }
  std::vector<double> w(L, 0.0);
  std::stringstream ss(leaves);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int pos = market.leaf_position(tok);
    if (pos < 0) throw std::invalid_argument("'" + tok + "' does not name a leaf");
    w[static_cast<std::size_t>(pos)] = 1.0;
  }
  return w;
}

DensityVector parse_belief(const FiniteMarket& market, const std::string& path) {
  if (path.empty()) return DensityVector::ones(market.leaf_space());
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open density file '" + path + "'");
  nlohmann::json doc = nlohmann::json::parse(in);
  return DensityVector(market.leaf_space(), doc.at("density").get<std::vector<double>>());
}

std::string vec_to_string(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += AnalysisReport::format_value(v[i]);
  }
  return s + ")";
}

std::vector<double> default_eps_grid() {
  std::vector<double> g;
  for (int j = 1; j <= 6; ++j) g.push_back(std::pow(2.0, -j));
  return g;
}

std::vector<YoungFunction> default_f_grid() {
  return {YoungFunction::power(2.0), YoungFunction::power(3.0),
          YoungFunction::exp_minus_linear()};
}

const char* verdict_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Found:
      return "found";
    case VerdictStatus::NotFoundOnPrefix:
      return "not-found-on-prefix";
    case VerdictStatus::CertifiedAbsent:
      return "certified-absent";
  }
  return "?";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-market laboratory: Orlicz calculus, martingale measures, "
               "asymptotic-arbitrage and market-free-lunch analysis"};
  app.require_subcommand(1);
  int exit_code = 0;

  // ---- orlicz ----
  auto* orlicz = app.add_subcommand("orlicz", "Young-function calculus");
  orlicz->require_subcommand(1);
  std::string o_record = "power p=2", o_space, o_vec;
  OutputConfig o_out;

  auto* conj = orlicz->add_subcommand("conj", "complementary Young function");
  conj->add_option("--F", o_record, "Young function record");
  add_output_flags(conj, &o_out);
  conj->callback([&] {
    auto F = parse_young(o_record);
    auto G = F.conjugate();
    AnalysisReport rep("complementary Young function");
    rep.add_note("F = " + F.to_text());
    rep.add_note("G = " + G.to_text());
    for (double y : {0.5, 1.0, 2.0}) rep.add_row(0, "G(" + AnalysisReport::format_value(y) + ")", G.value(y));
    emit(rep, o_out, "orlicz_conj");
  });

  auto* norm = orlicz->add_subcommand("norm", "Luxemburg norm of a claim");
  norm->add_option("--F", o_record, "Young function record");
  norm->add_option("--space", o_space, "atom probabilities p1,p2,...")->required();
  norm->add_option("--f", o_vec, "claim values v1,v2,...")->required();
  add_output_flags(norm, &o_out);
  norm->callback([&] {
    FiniteProbSpace space(parse_doubles(o_space));
    double v = luxemburg_norm(parse_doubles(o_vec), space, parse_young(o_record));
    AnalysisReport rep("Luxemburg norm");
    rep.add_row(0, "norm", v);
    emit(rep, o_out, "orlicz_norm");
  });

  auto* gauge = orlicz->add_subcommand("gauge", "polar gauge of a claim");
  gauge->add_option("--F", o_record, "Young function record");
  gauge->add_option("--space", o_space, "atom probabilities p1,p2,...")->required();
  gauge->add_option("--g", o_vec, "claim values v1,v2,...")->required();
  add_output_flags(gauge, &o_out);
  gauge->callback([&] {
    FiniteProbSpace space(parse_doubles(o_space));
    double v = polar_gauge(parse_doubles(o_vec), space, parse_young(o_record));
    AnalysisReport rep("polar gauge");
    rep.add_row(0, "gauge", v);
    rep.add_note(v <= 1.0 ? "g lies in the polar V^F" : "g lies outside the polar V^F");
    emit(rep, o_out, "orlicz_gauge");
  });

  // ---- market ----
  auto* market_cmd = app.add_subcommand("market", "single-market analysis");
  market_cmd->require_subcommand(1);
  std::string m_path, m_leaves, m_values, m_cert_out, m_cert_in;
  OutputConfig m_out;

  auto* emm = market_cmd->add_subcommand("emm", "equivalent martingale measure search");
  emm->add_option("file", m_path, "market JSON file")->required();
  add_output_flags(emm, &m_out);
  emm->callback([&] {
    auto market = FiniteMarket::load(m_path);
    auto res = find_emm(market);
    AnalysisReport rep("martingale measure search");
    if (res.found) {
      rep.add_row(0, "emm", res.min_prob, "q=" + vec_to_string(res.q));
      rep.add_note("q = " + vec_to_string(res.q));
    } else {
      rep.add_row(0, "emm-missing", 0.0);
      rep.add_note("no strictly positive separating measure exists");
      exit_code = 1;
    }
    emit(rep, m_out, "market_emm");
  });

  auto* na = market_cmd->add_subcommand("na", "no-arbitrage check");
  na->add_option("file", m_path, "market JSON file")->required();
  na->add_option("--cert-out", m_cert_out, "write the arbitrage certificate JSON here");
  add_output_flags(na, &m_out);
  na->callback([&] {
    auto market = FiniteMarket::load(m_path);
    auto res = check_na(market);
    AnalysisReport rep("no-arbitrage check");
    if (res.no_arbitrage) {
      rep.add_row(0, "NA", 0.0, "holds");
    } else {
      rep.add_row(0, "arbitrage", res.lp_gain, "f=" + vec_to_string(res.payoff));
      rep.add_note("strategy xi = " + vec_to_string(res.strategy));
      if (res.exact) rep.add_note("certificate re-verified in exact rational arithmetic");
      if (!m_cert_out.empty()) {
        nlohmann::json cert;
        cert["payoff"] = res.payoff;
        cert["strategy"] = res.strategy;
        std::ofstream out(m_cert_out);
        out << cert.dump(2) << "\n";
      }
      exit_code = 1;
    }
    emit(rep, m_out, "market_na");
  });

  auto* inc = market_cmd->add_subcommand("inC", "superreplication-cone membership");
  inc->add_option("file", m_path, "market JSON file")->required();
  inc->add_option("--f", m_values, "claim values v1,v2,...");
  inc->add_option("--f-file", m_cert_in, "JSON file with a payoff field");
  add_output_flags(inc, &m_out);
  inc->callback([&] {
    auto market = FiniteMarket::load(m_path);
    std::vector<double> f;
    if (!m_cert_in.empty()) {
      std::ifstream in(m_cert_in);
      if (!in) throw std::invalid_argument("cannot open claim file '" + m_cert_in + "'");
      f = nlohmann::json::parse(in).at("payoff").get<std::vector<double>>();
    } else if (!m_values.empty()) {
      f = parse_doubles(m_values);
    } else {
      throw std::invalid_argument("inC needs --f or --f-file");
    }
    auto res = in_C(market, f);
    AnalysisReport rep("superreplication membership");
    rep.add_row(0, res.member ? "inC" : "not-inC", res.shortfall);
    if (res.member) rep.add_note("dominating gain k = " + vec_to_string(res.dominating));
    emit(rep, m_out, "market_inC");
    if (!res.member) exit_code = 1;
  });

  // ---- utility ----
  auto* utility = app.add_subcommand("utility", "expected-utility optimization over C");
  utility->require_subcommand(1);
  std::string u_path, u_leaves, u_values, u_record = "power:2", u_belief;
  OutputConfig u_out;

  auto* usup = utility->add_subcommand("sup", "primal supremum");
  usup->add_option("file", u_path)->required();
  usup->add_option("--w", u_leaves, "endowment shift: leaf names (indicator)");
  usup->add_option("--w-values", u_values, "endowment shift values");
  usup->add_option("--F", u_record, "Young function for u_F");
  usup->add_option("--R", u_belief, "belief density JSON file");
  add_output_flags(usup, &u_out);
  usup->callback([&] {
    auto market = FiniteMarket::load(u_path);
    UtilityProblem prob{market, utility_from_young(parse_young(u_record)),
                        parse_belief(market, u_belief), parse_claim(market, u_leaves, u_values)};
    auto res = sup_utility_primal(prob);
    AnalysisReport rep("primal utility supremum");
    rep.add_row(0, "sup", res.value, res.unbounded ? "unbounded above" : "");
    rep.add_note("strategy xi = " + vec_to_string(res.strategy));
    emit(rep, u_out, "utility_sup");
    if (res.value >= -1e-12) exit_code = 1;  // nothing separates this endowment
  });

  auto* udual = utility->add_subcommand("dual", "dual optimizer (Q, lambda)");
  udual->add_option("file", u_path)->required();
  udual->add_option("--w", u_leaves, "endowment shift: leaf names (indicator)");
  udual->add_option("--w-values", u_values, "endowment shift values");
  udual->add_option("--F", u_record, "Young function for u_F");
  udual->add_option("--R", u_belief, "belief density JSON file");
  add_output_flags(udual, &u_out);
  udual->callback([&] {
    auto market = FiniteMarket::load(u_path);
    UtilityProblem prob{market, utility_from_young(parse_young(u_record)),
                        parse_belief(market, u_belief), parse_claim(market, u_leaves, u_values)};
    auto res = sup_utility_dual(prob);
    AnalysisReport rep("dual utility optimizer");
    rep.add_row(0, "value", res.value);
    rep.add_row(0, "lambda", res.lambda);
    rep.add_row(0, "gap", res.gap);
    if (res.attained) rep.add_note("Q = " + vec_to_string(res.q));
    if (!res.warning.empty()) rep.add_note(res.warning);
    emit(rep, u_out, "utility_dual");
    if (!res.attained) exit_code = 1;
  });

  // ---- seq ----
  auto* seq = app.add_subcommand("seq", "market-family (sequence) analysis");
  seq->require_subcommand(1);
  std::string s_path = "-", s_record = "power:2", s_density;
  int s_prefix = 0;
  double s_eps = 0.0, s_delta = 0.0;
  int s_levels = 6;
  bool s_exact = false;
  OutputConfig s_out;

  auto* contig = seq->add_subcommand("contiguity", "contiguity profile of a density sequence");
  contig->add_option("file", s_path, "family JSON file or - for stdin");
  contig->add_option("--prefix", s_prefix, "prefix length N");
  contig->add_option("--Q", s_density, "density sequence JSON file");
  add_output_flags(contig, &s_out);
  contig->callback([&] {
    auto fam = load_family(s_path);
    int N = s_prefix > 0 ? s_prefix : fam.prefix();
    MeasureSeq Q;
    if (s_density.empty()) {
      Q = identity_measures(fam, N);
    } else {
      std::ifstream in(s_density);
      if (!in) throw std::invalid_argument("cannot open density file '" + s_density + "'");
      auto doc = nlohmann::json::parse(in);
      for (int n = 1; n <= N; ++n)
        Q.densities.emplace_back(fam.market(n).leaf_space(),
                                 doc.at("densities").at(static_cast<std::size_t>(n - 1))
                                     .get<std::vector<double>>());
    }
    auto prof = contiguity_profile(fam, Q, N);
    AnalysisReport rep("contiguity profile");
    for (std::size_t e = 0; e < prof.eps_grid.size(); ++e) {
      rep.add_row(0, "delta(Q|P) eps=" + AnalysisReport::format_value(prof.eps_grid[e]),
                  prof.delta_q_given_p[e]);
      rep.add_row(0, "delta(P|Q) eps=" + AnalysisReport::format_value(prof.eps_grid[e]),
                  prof.delta_p_given_q[e]);
    }
    for (std::size_t k = 0; k < prof.kappa_grid.size(); ++k)
      rep.add_row(0, "ui-tail kappa=" + AnalysisReport::format_value(prof.kappa_grid[k]),
                  prof.ui_tail[k]);
    if (prof.young_witness.found)
      rep.add_note("Young domination witness " + prof.young_witness.witness->to_text());
    else
      rep.add_note("no Young domination witness in the power family");
    emit(rep, s_out, "seq_contiguity");
    if (!prof.young_witness.found) exit_code = 1;
  });

  auto* detect = seq->add_subcommand("detect", "asymptotic arbitrage detectors");
  detect->add_option("file", s_path, "family JSON file or - for stdin");
  detect->add_option("--prefix", s_prefix, "prefix length N");
  add_output_flags(detect, &s_out);
  detect->callback([&] {
    auto fam = load_family(s_path);
    DetectorParams params;
    params.prefix = s_prefix > 0 ? s_prefix : fam.prefix();
    AnalysisReport rep("asymptotic arbitrage detectors");
    bool any_found = false;
    for (const auto& verdict : {detect_aa1(fam, params), detect_aa2(fam, params),
                                detect_saa(fam, params), detect_aflbr(fam, params)}) {
      rep.add_row(0, verdict.condition, verdict.level, verdict_name(verdict.status));
      for (const auto& cert : verdict.certificates)
        rep.add_row(cert.n, verdict.condition + " certificate", cert.prob,
                    "xi=" + vec_to_string(cert.strategy) + " level=" +
                        AnalysisReport::format_value(cert.level));
      if (!verdict.note.empty()) rep.add_note(verdict.condition + ": " + verdict.note);
      any_found = any_found || verdict.status == VerdictStatus::Found;
    }
    emit(rep, s_out, "seq_detect");
    if (any_found) exit_code = 1;
  });

  auto* namfl = seq->add_subcommand("namfl", "worst-case market-free-lunch values");
  namfl->add_option("file", s_path, "family JSON file or - for stdin");
  namfl->add_option("--prefix", s_prefix, "prefix length N");
  namfl->add_option("--eps", s_eps, "single eps level (default: grid 2^-1..2^-6)");
  namfl->add_option("--F", s_record, "Young function record");
  namfl->add_option("--delta", s_delta, "margin for the NAMFL verdict");
  add_output_flags(namfl, &s_out);
  namfl->callback([&] {
    auto fam = load_family(s_path);
    int N = s_prefix > 0 ? s_prefix : fam.prefix();
    auto F = parse_young(s_record);
    std::vector<double> grid = s_eps > 0.0 ? std::vector<double>{s_eps} : default_eps_grid();
    AnalysisReport rep("worst-case market free lunch");
    bool signal = false;
    for (double eps : grid) {
      for (int n = 1; n <= N; ++n) {
        auto market = fam.market(n);
        auto res = namfl_worstcase(market, DensityVector::ones(market.leaf_space()), eps, F);
        rep.add_row(n, "NAMFL-wc eps=" + AnalysisReport::format_value(eps), res.value,
                    "worst w=" + vec_to_string(res.worst_w));
        if (res.value >= -s_delta - 1e-9) signal = true;
      }
    }
    rep.add_note(signal ? "free-lunch signal: some worst-case value is not below -delta"
                        : "all worst-case values lie below -delta");
    emit(rep, s_out, "seq_namfl");
    if (signal) exit_code = 1;
  });

  auto* nafl = seq->add_subcommand("nafl", "separation check of C from D^eps + V^F");
  nafl->add_option("file", s_path, "family JSON file or - for stdin");
  nafl->add_option("--prefix", s_prefix, "prefix length N");
  nafl->add_option("--eps", s_eps, "claim-class level eps")->required();
  nafl->add_option("--F", s_record, "Young function record");
  nafl->add_flag("--exact", s_exact, "use the polar gauge instead of the norm bound");
  add_output_flags(nafl, &s_out);
  nafl->callback([&] {
    auto fam = load_family(s_path);
    int N = s_prefix > 0 ? s_prefix : fam.prefix();
    auto F = parse_young(s_record);
    AnalysisReport rep("asymptotic free lunch separation");
    bool witness = false;
    for (int n = 1; n <= N; ++n) {
      auto res = nafl_check(fam.market(n), s_eps, F, s_exact);
      const char* name = res.outcome == NaflOutcome::Witness
                             ? "witness"
                             : res.outcome == NaflOutcome::NoWitness ? "no-witness"
                                                                     : "inconclusive";
      rep.add_row(n, "NAFL-sep", res.upper,
                  std::string(name) + " interval=[" + AnalysisReport::format_value(res.lower) +
                      "," + AnalysisReport::format_value(res.upper) + "]");
      witness = witness || res.outcome == NaflOutcome::Witness;
    }
    emit(rep, s_out, "seq_nafl");
    if (witness) exit_code = 1;
  });

  auto* build = seq->add_subcommand("build", "constructive bicontiguous measure sequence");
  build->add_option("file", s_path, "family JSON file or - for stdin");
  build->add_option("--prefix", s_prefix, "prefix length N");
  build->add_option("--J", s_levels, "eps grid depth (levels 2^-1..2^-J)");
  add_output_flags(build, &s_out);
  build->callback([&] {
    auto fam = load_family(s_path);
    int N = s_prefix > 0 ? s_prefix : fam.prefix();
    BuildOptions opts;
    opts.J = s_levels;
    opts.F_grid = default_f_grid();
    auto out = build_bicontiguous(fam, N, opts);
    AnalysisReport rep("bicontiguous measure construction");
    if (!out.success) {
      rep.add_row(out.error.n, "build-refused", out.error.eps, out.error.what);
      emit(rep, s_out, "seq_build");
      exit_code = 1;
      return;
    }
    for (std::size_t j = 0; j < out.eps_grid.size(); ++j)
      rep.add_row(0, "delta(eps=" + AnalysisReport::format_value(out.eps_grid[j]) + ")",
                  out.delta_of_eps[j]);
    for (int n = 1; n <= N; ++n) {
      double mn = 1e300;
      for (double v : out.emm_seq.at(n).values()) mn = std::min(mn, v);
      rep.add_row(n, "min dQ/dP", mn, "density=" + vec_to_string(out.emm_seq.at(n).values()));
    }
    for (std::size_t e = 0; e < out.profile.eps_grid.size(); ++e) {
      rep.add_row(0, "delta(Q|P) eps=" + AnalysisReport::format_value(out.profile.eps_grid[e]),
                  out.profile.delta_q_given_p[e]);
      rep.add_row(0, "delta(P|Q) eps=" + AnalysisReport::format_value(out.profile.eps_grid[e]),
                  out.profile.delta_p_given_q[e]);
    }
    rep.add_note("mixture remainder " + AnalysisReport::format_value(out.remainder));
    if (out.domination_forward.found)
      rep.add_note("forward domination witness " + out.domination_forward.witness->to_text());
    if (out.domination_reverse.found)
      rep.add_note("reverse domination witness " + out.domination_reverse.witness->to_text());
    emit(rep, s_out, "seq_build");
  });

  // ---- example ----
  auto* example = app.add_subcommand("example", "emit built-in family files");
  example->require_subcommand(1);
  double e_alpha = 0.3, e_p = 0.5, e_up = 1.0, e_down = -1.0;
  int e_periods = 2, e_prefix = 10;

  auto* klein = example->add_subcommand("klein", "one-period arbitrage family");
  klein->add_option("--alpha", e_alpha, "probability of the payoff event");
  klein->add_option("--prefix", e_prefix, "default prefix length");
  klein->callback([&] {
    std::cout << MarketFamily::klein(e_alpha, e_prefix).to_json().dump(2) << "\n";
  });

  auto* binomial = example->add_subcommand("binomial", "i.i.d. binary-tree family");
  binomial->add_option("--p", e_p, "up probability");
  binomial->add_option("--up", e_up, "up increment");
  binomial->add_option("--down", e_down, "down increment");
  binomial->add_option("--periods", e_periods, "horizon");
  binomial->add_option("--prefix", e_prefix, "default prefix length");
  binomial->callback([&] {
    std::cout << MarketFamily::binomial(e_p, e_up, e_down, e_periods, e_prefix).to_json().dump(2)
              << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
