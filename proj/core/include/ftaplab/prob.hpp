#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ftaplab {

/// A finite probability space given by labelled atoms with strictly
/// positive probabilities summing to one.
class FiniteProbSpace {
 public:
  FiniteProbSpace() = default;

  FiniteProbSpace(std::vector<std::string> labels, std::vector<double> probs)
      : labels_(std::move(labels)), probs_(std::move(probs)) {
    validate();
  }

  /// Unlabelled convenience constructor; atoms are named "0", "1", ...
  explicit FiniteProbSpace(std::vector<double> probs) : probs_(std::move(probs)) {
    labels_.reserve(probs_.size());
    for (std::size_t i = 0; i < probs_.size(); ++i) labels_.push_back(std::to_string(i));
    validate();
  }

  static FiniteProbSpace uniform(std::size_t n) {
    return FiniteProbSpace(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const { return probs_.size(); }
  double prob(std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const { return probs_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == label) return static_cast<int>(i);
    return -1;
  }

  double expectation(const std::vector<double>& f) const {
    require_length(f);
    double s = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) s += probs_[i] * f[i];
    return s;
  }

  void require_length(const std::vector<double>& f) const {
    if (f.size() != probs_.size())
      throw std::invalid_argument("vector length " + std::to_string(f.size()) +
                                  " does not match atom count " + std::to_string(probs_.size()));
  }

  bool operator==(const FiniteProbSpace& o) const {
    return labels_ == o.labels_ && probs_ == o.probs_;
  }

 private:
  void validate() {
    if (probs_.empty()) throw std::invalid_argument("probability space needs at least one atom");
    if (labels_.size() != probs_.size())
      throw std::invalid_argument("label count does not match probability count");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      if (!(probs_[i] > 0.0))
        throw std::invalid_argument("atom '" + labels_[i] + "' has non-positive probability");
      sum += probs_[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", not 1");
    for (double& p : probs_) p /= sum;  // exact renormalization after the tolerance check
  }

  std::vector<std::string> labels_;
  std::vector<double> probs_;
};

/// A real vector indexed by the atoms of a FiniteProbSpace. Used both for
/// claims and for densities dQ/dP of absolutely continuous measures.
class DensityVector {
 public:
  DensityVector() = default;
  DensityVector(FiniteProbSpace space, std::vector<double> values)
      : space_(std::move(space)), values_(std::move(values)) {
    space_.require_length(values_);
  }

  static DensityVector ones(const FiniteProbSpace& space) {
    return DensityVector(space, std::vector<double>(space.size(), 1.0));
  }

  const FiniteProbSpace& space() const { return space_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  double expectation() const { return space_.expectation(values_); }

  /// Probability the induced measure assigns to atom i.
  double measure(std::size_t i) const { return space_.prob(i) * values_[i]; }

  /// Measure of a set of atom indices.
  double measure_of(const std::vector<std::size_t>& atoms) const {
    double s = 0.0;
    for (auto i : atoms) s += measure(i);
    return s;
  }

  bool is_nonnegative(double tol = 0.0) const {
    for (double v : values_)
      if (v < -tol) return false;
    return true;
  }

  bool is_strictly_positive(double tol = 0.0) const {
    for (double v : values_)
      if (v <= tol) return false;
    return true;
  }

  /// Checks the probability-density contract: values >= 0 and E_P[values] = 1.
  void require_probability_density(double tol = 1e-10) const {
    if (!is_nonnegative(tol)) throw std::invalid_argument("density has negative component");
    double e = expectation();
    if (std::abs(e - 1.0) > tol)
      throw std::invalid_argument("density expectation " + std::to_string(e) + " is not 1");
  }

 private:
  FiniteProbSpace space_;
  std::vector<double> values_;
};

}  // namespace ftaplab
