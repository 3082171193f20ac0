#include "tbnls/lattice.hpp"

#include <cmath>
#include <sstream>

namespace tbnls {

LatticeModel::LatticeModel(double cell_size, int num_cells, int points_per_cell,
                           RealField potential, RealField perturbation)
    : cell_size_(cell_size),
      num_cells_(num_cells),
      points_per_cell_(points_per_cell),
      potential_(std::move(potential)),
      perturbation_(std::move(perturbation)) {
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
  if (num_cells < 4 || num_cells % 2 != 0)
    throw std::invalid_argument("num_cells must be even and at least 4");
  if (points_per_cell < 4 || points_per_cell % 2 != 0)
    throw std::invalid_argument("points_per_cell must be even and at least 4");
  if (potential_.size() != grid_size() || perturbation_.size() != grid_size())
    throw std::invalid_argument("potential/perturbation size does not match the grid");
  if (!potential_.allFinite() || !perturbation_.allFinite())
    throw std::invalid_argument("potential and perturbation must be finite");
}

LatticeModel LatticeModel::build(const LatticeSpec& spec) {
  if (!(spec.cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
  if (spec.num_cells < 4 || spec.num_cells % 2 != 0)
    throw std::invalid_argument("num_cells must be even and at least 4");
  if (spec.points_per_cell < 4 || spec.points_per_cell % 2 != 0)
    throw std::invalid_argument("points_per_cell must be even and at least 4");

  const int n = spec.num_cells * spec.points_per_cell;
  const double a = spec.cell_size;
  const double dx = a / spec.points_per_cell;
  const double length = a * spec.num_cells;
  RealField v(n), w(n);
  for (int j = 0; j < n; ++j) {
    // The grid starts on a cell centre; use the in-cell phase m/M so that
    // V is periodic on the grid to the last bit.
    const int m = j % spec.points_per_cell;
    const double phase = kPi * m / spec.points_per_cell;
    const double x = -0.5 * length + j * dx;
    const auto& p = spec.potential;
    if (p.name == "sin2") {
      const double s = std::sin(phase);
      v[j] = p.depth * s * s;
    } else if (p.name == "cos-lattice") {
      v[j] = p.depth * 0.5 * (1.0 - std::cos(2.0 * phase));
    } else if (p.name == "zero") {
      v[j] = 0.0;
    } else {
      throw std::invalid_argument("unknown potential '" + p.name + "'");
    }
    const auto& q = spec.perturbation;
    if (q.name == "w-cos") {
      w[j] = q.amplitude * std::cos(2.0 * kPi * x / length);
    } else if (q.name == "w-tanh") {
      if (!(q.length > 0.0)) throw std::invalid_argument("w-tanh length must be positive");
      w[j] = q.amplitude * std::tanh(x / q.length);
    } else if (q.name == "zero") {
      w[j] = 0.0;
    } else {
      throw std::invalid_argument("unknown perturbation '" + q.name + "'");
    }
  }
  return LatticeModel(a, spec.num_cells, spec.points_per_cell, std::move(v), std::move(w));
}

int LatticeModel::site_index(int site) const {
  const int n = ((site % num_cells_) + num_cells_) % num_cells_;
  return n * points_per_cell_;
}

int LatticeModel::offset_from_site(int j, int site) const {
  const int n = grid_size();
  int d = ((j - site_index(site)) % n + n) % n;
  if (d >= n / 2) d -= n;
  return d;
}

std::vector<std::string> LatticeModel::check_hypotheses() const {
  std::vector<std::string> issues;
  const int n = grid_size();
  const int m = points_per_cell_;
  const double scale = std::max(1.0, potential_.cwiseAbs().maxCoeff());
  for (int j = 0; j < n; ++j) {
    if (std::abs(potential_[(j + m) % n] - potential_[j]) > 1e-12 * scale) {
      issues.push_back("potential is not periodic with the cell size");
      break;
    }
  }
  const double vmin = potential_.minCoeff();
  if (std::abs(vmin) > 1e-12 * scale) {
    std::ostringstream os;
    os << "potential minimum is " << vmin << ", expected 0";
    issues.push_back(os.str());
  }
  int minima_in_cell = 0;
  for (int j = 0; j < m; ++j)
    if (potential_[j] - vmin <= 1e-14 * scale) ++minima_in_cell;
  if (minima_in_cell != 1 || potential_[0] - vmin > 1e-14 * scale)
    issues.push_back("potential minimum must be attained once per cell, at the cell centre");
  if ((potential_.array() < -1e-14 * scale).any()) issues.push_back("potential must be non-negative");
  if (!perturbation_.allFinite()) issues.push_back("perturbation must be bounded");
  return issues;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::model1: return "model1";
    case Regime::model2: return "model2";
    case Regime::custom: return "custom";
  }
  return "custom";
}

Regime regime_from_string(const std::string& s) {
  if (s == "model1") return Regime::model1;
  if (s == "model2") return Regime::model2;
  if (s == "custom") return Regime::custom;
  throw std::invalid_argument("unknown model '" + s + "' (expected model1, model2 or custom)");
}

void SemiclassicalParams::validate() const {
  if (!(hbar > 0.0) || hbar > 1.0) throw std::invalid_argument("hbar must lie in (0, 1]");
  if (!(F >= 0.0)) throw std::invalid_argument("F must be non-negative");
  if (!std::isfinite(eta)) throw std::invalid_argument("eta must be finite");
}

SemiclassicalParams model1_params(double hbar, double k_F, double k_eta) {
  SemiclassicalParams p{hbar, k_F * hbar * hbar, k_eta * hbar * hbar, Regime::model1};
  p.validate();
  return p;
}

SemiclassicalParams model2_params(double hbar, double beta, double k_F, double k_eta) {
  if (!(beta > 0.0)) throw std::invalid_argument("model2 needs a positive hopping beta");
  SemiclassicalParams p{hbar, k_F * beta, k_eta * std::sqrt(hbar) * beta, Regime::model2};
  p.validate();
  return p;
}

RescaledParams rescale(const PhysicalParams& p) {
  if (!(p.planck > 0.0) || !(p.mass > 0.0) || !(p.epsilon > 0.0))
    throw std::invalid_argument("planck constant, mass and epsilon must be positive");
  RescaledParams r;
  const double h = p.planck * std::sqrt(p.epsilon / (2.0 * p.mass));
  const double factor = 2.0 * p.mass * h * h / (p.planck * p.planck);  // == epsilon
  r.params = SemiclassicalParams{h, p.alpha1 * factor, p.alpha2 * factor, Regime::custom};
  r.time_scale = p.epsilon * p.planck / h;
  return r;
}

}  // namespace tbnls
