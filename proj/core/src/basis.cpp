#include "tbnls/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace tbnls {

RealField filled_potential(const LatticeModel& model, int site) {
  const RealField& v = model.potential();
  const double top = v.maxCoeff();
  const int half = model.points_per_cell() / 2;
  RealField out(v.size());
  for (int j = 0; j < v.size(); ++j)
    out[j] = std::abs(model.offset_from_site(j, site)) <= half ? v[j] : top;
  return out;
}

SingleWellProblem build_single_well(const LatticeModel& model, double hbar, int site,
                                    const SingleWellOptions& options) {
  if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
  if (model.dx() > max_grid_spacing(hbar) * (1.0 + 1e-12))
    throw ResolutionError("grid too coarse for the single-well problem at this hbar");
  if (options.window_cells < 1) throw std::invalid_argument("window_cells must be positive");

  SingleWellProblem well;
  well.site = ((site % model.num_cells()) + model.num_cells()) % model.num_cells();
  well.filled_potential = filled_potential(model, well.site);

  const int n = model.grid_size();
  const int cells = std::min(options.window_cells, model.num_cells());
  const int nw = cells * model.points_per_cell();
  const int centre = model.site_index(well.site);
  auto global = [&](int i) { return ((centre + i - nw / 2) % n + n) % n; };

  // Pseudospectral second-derivative stencil of the periodic window.
  const Fft fft(nw);
  Field delta = Field::Zero(nw);
  delta[0] = 1.0;
  Field spec = fft.forward(delta);
  spec.array() *= wavenumbers(nw, model.dx()).array().square().cast<cplx>();
  const RealField stencil = fft.inverse(spec).real();

  Eigen::MatrixXd h(nw, nw);
  for (int i = 0; i < nw; ++i)
    for (int k = 0; k < nw; ++k) h(i, k) = hbar * hbar * stencil[((i - k) % nw + nw) % nw];
  for (int i = 0; i < nw; ++i) h(i, i) += well.filled_potential[global(i)];

  // Inverse iteration on the positive-definite operator (min V_n = 0 for the
  // built-in potentials, shifted below otherwise); the first two levels of a
  // deep well are ~ h and ~ 3h apart from the bottom, so convergence is fast.
  // The full eigensolver is the fallback.
  const double floor = well.filled_potential.minCoeff() - 1e-3 * hbar;
  Eigen::MatrixXd shifted = h;
  shifted.diagonal().array() -= floor;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(nw);
  double lambda = 0.0;
  bool converged = false;
  if (llt.info() == Eigen::Success) {
    g.normalize();
    const double scale = h.diagonal().cwiseAbs().maxCoeff() + hbar * hbar * std::abs(stencil[0]);
    for (int it = 0; it < 200 && !converged; ++it) {
      g = llt.solve(g);
      g.normalize();
      const Eigen::VectorXd hg = h * g;
      lambda = g.dot(hg);
      converged = (hg - lambda * g).norm() <= 1e-12 * scale;
    }
  }
  if (converged) {
    well.ground_energy = lambda;
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success)
      throw SpectralError("single-well eigensolver did not converge");
    well.ground_energy = solver.eigenvalues()[0];
    g = solver.eigenvectors().col(0);
  }
  if (g[nw / 2] < 0.0) g = -g;

  well.ground_state = Field::Zero(n);
  for (int i = 0; i < nw; ++i) well.ground_state[global(i)] = g[i];
  well.ground_state /= l2_norm(well.ground_state, model.dx());

  const double top = model.potential().maxCoeff();
  if (well.ground_energy >= top) {
    std::ostringstream os;
    os << "Lambda_1 = " << well.ground_energy << " lies above the barrier top " << top
       << ": semiclassical regime not reached";
    well.warnings.push_back(os.str());
  }
  return well;
}

SingleWellProblem translate_well(const SingleWellProblem& well, const LatticeModel& model,
                                 int site) {
  const int n = model.grid_size();
  const int target = ((site % model.num_cells()) + model.num_cells()) % model.num_cells();
  const int shift = (target - well.site) * model.points_per_cell();
  SingleWellProblem out;
  out.site = target;
  out.ground_energy = well.ground_energy;
  out.warnings = well.warnings;
  out.filled_potential.resize(n);
  out.ground_state.resize(n);
  for (int j = 0; j < n; ++j) {
    const int src = ((j - shift) % n + n) % n;
    out.filled_potential[j] = well.filled_potential[src];
    out.ground_state[j] = well.ground_state[src];
  }
  return out;
}

LocalizedBasis construct_basis(const BandData& band, const std::vector<SingleWellProblem>& wells) {
  const int count = static_cast<int>(wells.size());
  if (count != static_cast<int>(band.states.size()))
    throw std::invalid_argument("construct_basis: need one well state per lattice site");
  for (int i = 0; i < count; ++i)
    if (wells[i].site != i) throw std::invalid_argument("construct_basis: wells must be in site order");

  const double dx = band.dx;
  std::vector<Field> projected;
  projected.reserve(count);
  for (const auto& w : wells) projected.push_back(band_projection(w.ground_state, band));

  Eigen::MatrixXcd gram(count, count);
  for (int i = 0; i < count; ++i)
    for (int k = i; k < count; ++k) {
      gram(i, k) = inner(projected[i], projected[k], dx);
      gram(k, i) = std::conj(gram(i, k));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
  const RealField& ev = solver.eigenvalues();
  LocalizedBasis basis;
  basis.dx = dx;
  basis.gram_condition = ev.maxCoeff() / std::max(ev.minCoeff(), 1e-300);
  if (!(ev.minCoeff() > 1e-12 * ev.maxCoeff())) {
    std::ostringstream os;
    os << "projected well states are linearly dependent (Gram condition number "
       << basis.gram_condition << ")";
    throw SpectralError(os.str());
  }
  const Eigen::MatrixXcd inv_sqrt = solver.eigenvectors() *
                                    ev.cwiseInverse().cwiseSqrt().cast<cplx>().asDiagonal() *
                                    solver.eigenvectors().adjoint();

  basis.functions.assign(count, Field::Zero(band.states.front().size()));
  for (int i = 0; i < count; ++i)
    for (int k = 0; k < count; ++k) basis.functions[i] += inv_sqrt(k, i) * projected[k];

  for (int i = 0; i < count; ++i) {
    for (int k = 0; k < count; ++k) {
      const cplx g = inner(basis.functions[i], basis.functions[k], dx);
      basis.gram_residual = std::max(basis.gram_residual, std::abs(g - (i == k ? 1.0 : 0.0)));
    }
    const Field back = band_projection(basis.functions[i], band);
    basis.band_residual = std::max(basis.band_residual, l2_norm(back - basis.functions[i], dx));
  }
  const int c = count / 2;
  basis.well_distance = l2_norm(basis.functions[c] - wells[c].ground_state, dx);
  return basis;
}

double TightBindingCoefficients::residual_bound() const {
  return residual.cwiseAbs().rowwise().sum().maxCoeff();
}

namespace {

Eigen::MatrixXcd matrix_elements(const std::vector<Field>& u, const std::vector<Field>& au, double dx) {
  const int n = static_cast<int>(u.size());
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = inner(u[i], au[k], dx);
  return m;
}

}  // namespace

TightBindingCoefficients extract_coefficients(LocalizedBasis& basis, const BlochHamiltonian& h,
                                              double lambda1) {
  const auto& model = h.model();
  const int n = basis.size();
  if (n != model.num_cells()) throw std::invalid_argument("basis size does not match the lattice");
  const double dx = basis.dx;
  const int c = model.central_site();

  TightBindingCoefficients tb;
  tb.lambda1 = lambda1;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<Field> hu;
    hu.reserve(n);
    for (const auto& u : basis.functions) hu.push_back(h.apply(u));
    tb.hamiltonian = matrix_elements(basis.functions, hu, dx);
    tb.beta = -tb.hamiltonian(c, (c + 1) % n).real();
    if (tb.beta > 0.0) break;
    if (attempt == 1) {
      std::ostringstream os;
      os << "hopping beta = " << tb.beta << " is not positive after re-fixing the basis gauge";
      throw SpectralError(os.str());
    }
    // Re-fix: every u_n real positive at its own well bottom.
    for (int i = 0; i < n; ++i) {
      const cplx at = basis.functions[i][model.site_index(i)];
      if (std::abs(at) > 0.0) basis.functions[i] *= std::conj(at) / std::abs(at);
    }
  }

  const RealField& w = model.perturbation();
  std::vector<Field> wu;
  wu.reserve(n);
  for (const auto& u : basis.functions) wu.push_back(w.cast<cplx>().cwiseProduct(u));
  tb.perturbation = matrix_elements(basis.functions, wu, dx);
  tb.chi.resize(n);
  for (int i = 0; i < n; ++i) tb.chi[i] = tb.perturbation(i, i).real();

  tb.c1 = dx * basis.functions[c].cwiseAbs2().array().square().sum();

  tb.residual = tb.hamiltonian;
  for (int i = 0; i < n; ++i) {
    tb.residual(i, i) -= lambda1;
    tb.residual(i, (i + 1) % n) += tb.beta;
    tb.residual(i, (i + n - 1) % n) += tb.beta;
  }
  tb.s0 = agmon_distance(model);
  return tb;
}

double agmon_distance(const LatticeModel& model) {
  const RealField& v = model.potential();
  const double vmin = v.minCoeff();
  const int m = model.points_per_cell();
  const int n = model.grid_size();
  const int start = model.site_index(model.central_site());
  auto f = [&](int i) { return std::sqrt(std::max(v[(start + i) % n] - vmin, 0.0)); };
  // Composite Simpson over the M intervals between two well bottoms.
  double sum = f(0) + f(m);
  for (int i = 1; i < m; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(i);
  return sum * model.dx() / 3.0;
}

ReductionSetup prepare_reduction(const LatticeModel& model, double hbar,
                                 const SingleWellOptions& options) {
  SingleWellProblem well = build_single_well(model, hbar, model.central_site(), options);
  BlochHamiltonian hamiltonian(model, hbar);
  BlochSpectrum spectrum(hamiltonian);
  BandOptions band_options;
  band_options.gauge_reference = well.ground_state;
  BandData band = compute_band_data(spectrum, band_options);

  std::vector<SingleWellProblem> wells;
  wells.reserve(model.num_cells());
  for (int n = 0; n < model.num_cells(); ++n) wells.push_back(translate_well(well, model, n));
  LocalizedBasis basis = construct_basis(band, wells);
  TightBindingCoefficients coefficients =
      extract_coefficients(basis, hamiltonian, well.ground_energy);
  return ReductionSetup{model,          hbar,           std::move(hamiltonian),
                        std::move(spectrum), std::move(band), std::move(well),
                        std::move(basis),    std::move(coefficients)};
}

}  // namespace tbnls
