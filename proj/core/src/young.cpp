#include "ftaplab/young.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ftaplab {

namespace {

double checked_nonneg(double x, const char* what) {
  if (!(x >= 0.0)) throw std::domain_error(std::string(what) + " requires a nonnegative argument");
  return x;
}

}  // namespace

YoungFunction YoungFunction::power(double p, double c) {
  if (!(p > 1.0)) throw std::invalid_argument("power Young function needs exponent p > 1");
  if (!(c > 0.0)) throw std::invalid_argument("power Young function needs coefficient c > 0");
  return YoungFunction(Kind::Power, p, c);
}

YoungFunction YoungFunction::exp_minus_linear() {
  return YoungFunction(Kind::ExpMinusLinear, 0.0, 0.0);
}

YoungFunction YoungFunction::entropy() { return YoungFunction(Kind::Entropy, 0.0, 0.0); }

YoungFunction YoungFunction::tabulated(std::vector<DerivativeKnot> knots, double tail_exponent) {
  YoungFunction F(Kind::Tabulated, tail_exponent, 0.0);
  F.knots_ = std::move(knots);
  F.validate_tabulated();
  F.cumulative_.assign(F.knots_.size(), 0.0);
  for (std::size_t i = 1; i < F.knots_.size(); ++i) {
    const auto& a = F.knots_[i - 1];
    const auto& b = F.knots_[i];
    F.cumulative_[i] = F.cumulative_[i - 1] + 0.5 * (a.slope + b.slope) * (b.x - a.x);
  }
  return F;
}

void YoungFunction::validate_tabulated() const {
  if (knots_.size() < 2)
    throw std::invalid_argument("tabulated Young function needs at least two derivative samples");
  if (knots_.front().x != 0.0 || knots_.front().slope != 0.0)
    throw std::invalid_argument("tabulated Young function must start with knot (0,0)");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].x > knots_[i - 1].x))
      throw std::invalid_argument("tabulated knots must be strictly increasing");
    if (!(knots_[i].slope > knots_[i - 1].slope))
      throw std::invalid_argument("tabulated derivative samples must be strictly increasing");
  }
  if (!(p_ > 1.0)) throw std::invalid_argument("tabulated tail exponent must exceed 1");
}

double YoungFunction::value(double x) const {
  checked_nonneg(x, "YoungFunction::value");
  switch (kind_) {
    case Kind::Power:
      return c_ * std::pow(x, p_);
    case Kind::ExpMinusLinear: {
      if (x > 700.0) return std::numeric_limits<double>::infinity();
      return std::expm1(x) - x;
    }
    case Kind::Entropy:
      return x == 0.0 ? 0.0 : (1.0 + x) * std::log1p(x) - x;
    case Kind::Tabulated: {
      const auto& last = knots_.back();
      if (x >= last.x) {
        // F(t_K) + integral of s_K (t/t_K)^(p-1)
        double ratio = x / last.x;
        return cumulative_.back() + last.slope * last.x / p_ * (std::pow(ratio, p_) - 1.0);
      }
      std::size_t i = 1;
      while (knots_[i].x < x) ++i;
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      double t = x - a.x;
      double rate = (b.slope - a.slope) / (b.x - a.x);
      return cumulative_[i - 1] + a.slope * t + 0.5 * rate * t * t;
    }
  }
  return 0.0;
}

double YoungFunction::derivative(double x) const {
  checked_nonneg(x, "YoungFunction::derivative");
  switch (kind_) {
    case Kind::Power:
      return c_ * p_ * std::pow(x, p_ - 1.0);
    case Kind::ExpMinusLinear:
      if (x > 700.0) return std::numeric_limits<double>::infinity();
      return std::expm1(x);
    case Kind::Entropy:
      return std::log1p(x);
    case Kind::Tabulated: {
      const auto& last = knots_.back();
      if (x >= last.x) return last.slope * std::pow(x / last.x, p_ - 1.0);
      std::size_t i = 1;
      while (knots_[i].x < x) ++i;
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      return a.slope + (b.slope - a.slope) * (x - a.x) / (b.x - a.x);
    }
  }
  return 0.0;
}

double YoungFunction::derivative_inverse(double y) const {
  checked_nonneg(y, "YoungFunction::derivative_inverse");
  switch (kind_) {
    case Kind::Power:
      return std::pow(y / (c_ * p_), 1.0 / (p_ - 1.0));
    case Kind::ExpMinusLinear:
      return std::log1p(y);
    case Kind::Entropy:
      return std::expm1(y);
    case Kind::Tabulated: {
      const auto& last = knots_.back();
      if (y >= last.slope) return last.x * std::pow(y / last.slope, 1.0 / (p_ - 1.0));
      std::size_t i = 1;
      while (knots_[i].slope < y) ++i;
      const auto& a = knots_[i - 1];
      const auto& b = knots_[i];
      return a.x + (b.x - a.x) * (y - a.slope) / (b.slope - a.slope);
    }
  }
  return 0.0;
}

double YoungFunction::value_inverse(double y) const {
  checked_nonneg(y, "YoungFunction::value_inverse");
  if (y == 0.0) return 0.0;
  double hi = 1.0;
  while (value(hi) < y) hi *= 2.0;
  double lo = hi > 1.0 ? hi * 0.5 : 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++i) {
    double mid = 0.5 * (lo + hi);
    (value(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

YoungFunction YoungFunction::conjugate() const {
  switch (kind_) {
    case Kind::Power: {
      // G(y) = c' y^q with q = p/(p-1), c' = (c p)^(-1/(p-1)) / q.
      double q = p_ / (p_ - 1.0);
      double cq = std::pow(c_ * p_, -1.0 / (p_ - 1.0)) / q;
      return power(q, cq);
    }
    case Kind::ExpMinusLinear:
      return entropy();
    case Kind::Entropy:
      return exp_minus_linear();
    case Kind::Tabulated: {
      validate_tabulated();
      // G' = (F')^{-1} is the knot table with (x, slope) swapped, and the
      // polynomial tail exponent maps to its conjugate exponent.
      std::vector<DerivativeKnot> swapped;
      swapped.reserve(knots_.size());
      for (const auto& k : knots_) swapped.push_back({k.slope, k.x});
      return tabulated(std::move(swapped), p_ / (p_ - 1.0));
    }
  }
  throw std::logic_error("unreachable");
}

std::string YoungFunction::to_text() const {
  char buf[64];
  switch (kind_) {
    case Kind::Power: {
      std::ostringstream os;
      std::snprintf(buf, sizeof buf, "%.12g", p_);
      os << "power p=" << buf;
      std::snprintf(buf, sizeof buf, "%.12g", c_);
      os << " c=" << buf;
      return os.str();
    }
    case Kind::ExpMinusLinear:
      return "expml";
    case Kind::Entropy:
      return "entropy";
    case Kind::Tabulated: {
      std::ostringstream os;
      os << "tab knots=[";
      for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (i) os << ",";
        std::snprintf(buf, sizeof buf, "(%.12g,%.12g)", knots_[i].x, knots_[i].slope);
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "%.12g", p_);
      os << "] tail=" << buf;
      return os.str();
    }
  }
  return {};
}

YoungFunction YoungFunction::from_text(const std::string& record) {
  std::istringstream is(record);
  std::string head;
  is >> head;
  if (head == "expml") return exp_minus_linear();
  if (head == "entropy") return entropy();
  if (head == "power") {
    double p = 0.0;
    double c = -1.0;
    std::string tok;
    while (is >> tok) {
      if (tok.rfind("p=", 0) == 0) p = std::stod(tok.substr(2));
      else if (tok.rfind("c=", 0) == 0) c = std::stod(tok.substr(2));
      else throw std::invalid_argument("bad power record token: " + tok);
    }
    if (p == 0.0) throw std::invalid_argument("power record needs p=<exponent>");
    return c < 0.0 ? power(p) : power(p, c);
  }
  if (head == "tab") {
    std::string rest;
    std::getline(is, rest);
    auto kpos = rest.find("knots=[");
    auto tpos = rest.find("tail=");
    if (kpos == std::string::npos || tpos == std::string::npos)
      throw std::invalid_argument("tab record needs knots=[...] and tail=");
    auto kend = rest.find(']', kpos);
    std::string body = rest.substr(kpos + 7, kend - kpos - 7);
    std::vector<DerivativeKnot> knots;
    std::size_t pos = 0;
    while ((pos = body.find('(', pos)) != std::string::npos) {
      auto comma = body.find(',', pos);
      auto close = body.find(')', pos);
      knots.push_back({std::stod(body.substr(pos + 1, comma - pos - 1)),
                       std::stod(body.substr(comma + 1, close - comma - 1))});
      pos = close + 1;
    }
    double tail = std::stod(rest.substr(tpos + 5));
    return tabulated(std::move(knots), tail);
  }
  throw std::invalid_argument("unknown Young function record: " + record);
}

double ui_tail_bound(const YoungFunction& F, double kappa) {
  if (!(kappa > 0.0)) throw std::domain_error("ui_tail_bound needs kappa > 0");
  double fk = F.value(kappa);
  if (!(fk > 0.0)) throw std::domain_error("ui_tail_bound needs F(kappa) > 0");
  return kappa / fk;
}

}  // namespace ftaplab
