#pragma once

// Dense statevector machinery used to validate the two-level reductions and
// closed-form distributions used by the estimators.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/random.hpp"

namespace qsa {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kSpectralTolerance = 1e-8;
inline constexpr double kDegenerateProbability = 1e-12;
inline constexpr Eigen::Index kDenseCap = Eigen::Index{1} << 12;

inline bool is_normalized(const ComplexVector& psi, double tol = kNormTolerance) {
  return std::abs(psi.norm() - 1.0) <= tol;
}

inline void require_state(const ComplexVector& psi) {
  if (psi.size() == 0) throw DimensionError("empty state vector");
  if (!is_normalized(psi)) throw PreconditionError("state vector is not normalized");
}

/// A square matrix checked to be unitary (U^dagger U = I within 1e-10).
class Unitary {
 public:
  explicit Unitary(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DimensionError("unitary must be square and non-empty");
    const ComplexMatrix gram = m_.adjoint() * m_;
    const ComplexMatrix id = ComplexMatrix::Identity(m_.rows(), m_.cols());
    if ((gram - id).cwiseAbs().maxCoeff() > kNormTolerance)
      throw PreconditionError("matrix is not unitary");
  }

  static Unitary identity(Eigen::Index dim) {
    return Unitary(ComplexMatrix::Identity(dim, dim));
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dimension() const noexcept { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

/// An orthogonal projector (P^2 = P = P^dagger within 1e-10).
class Projector {
 public:
  explicit Projector(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() == 0)
      throw DimensionError("projector must be square and non-empty");
    if ((m_ * m_ - m_).cwiseAbs().maxCoeff() > kNormTolerance ||
        (m_ - m_.adjoint()).cwiseAbs().maxCoeff() > kNormTolerance)
      throw PreconditionError("matrix is not an orthogonal projector");
  }

  // Projector onto the span of the given computational basis indices.
  static Projector onto_basis(Eigen::Index dim, const std::vector<Eigen::Index>& indices) {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (auto i : indices) {
      if (i < 0 || i >= dim) throw DimensionError("basis index out of range");
      m(i, i) = 1.0;
    }
    return Projector(std::move(m));
  }

  static Projector onto_state(const ComplexVector& psi) {
    require_state(psi);
    return Projector(psi * psi.adjoint());
  }

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dimension() const noexcept { return m_.rows(); }

 private:
  ComplexMatrix m_;
};

inline ComplexVector apply_unitary(const Unitary& u, const ComplexVector& psi) {
  if (u.dimension() != psi.size())
    throw DimensionError("unitary and state dimensions differ");
  return u.matrix() * psi;
}

struct MeasurementOutcome {
  int bit = 0;
  ComplexVector post_state;
  double probability = 0.0;  // probability of the projector outcome (bit = 1)
};

/// Two-outcome projective measurement {Pi, I - Pi}. Outcomes with probability
/// within 1e-12 of 0 or 1 are resolved without consuming randomness.
inline MeasurementOutcome measure_projector(const ComplexVector& psi, const Projector& proj,
                                            RandomSource& rng) {
  require_state(psi);
  if (proj.dimension() != psi.size())
    throw DimensionError("projector and state dimensions differ");
  ComplexVector inside = proj.matrix() * psi;
  const double p = std::clamp(inside.squaredNorm(), 0.0, 1.0);
  MeasurementOutcome out;
  out.probability = p;
  if (p >= 1.0 - kDegenerateProbability) {
    out.bit = 1;
    out.post_state = psi;
    return out;
  }
  if (p <= kDegenerateProbability) {
    out.bit = 0;
    out.post_state = psi;
    return out;
  }
  if (rng.bernoulli(p)) {
    out.bit = 1;
    out.post_state = inside / std::sqrt(p);
  } else {
    out.bit = 0;
    ComplexVector outside = psi - inside;
    out.post_state = outside / std::sqrt(1.0 - p);
  }
  return out;
}

struct Eigenpair {
  double phase = 0.0;  // eigenvalue exp(2 pi i phase), phase in [0, 1)
  ComplexVector vector;
};

inline double phase_of(Complex z) {
  double phase = std::arg(z) / (2.0 * std::numbers::pi);
  if (phase < 0.0) phase += 1.0;
  if (phase >= 1.0 || 1.0 - phase < 1e-13) phase = 0.0;
  return phase;
}

/// Eigendecomposition of a unitary through its complex Schur form, which is
/// diagonal for normal matrices and yields orthonormal eigenvectors even for
/// degenerate eigenvalues. Sorted by phase.
inline std::vector<Eigenpair> eigendecompose_unitary(const Unitary& u) {
  if (u.dimension() > kDenseCap) throw CapExceeded("unitary dimension exceeds 2^12");
  Eigen::ComplexSchur<ComplexMatrix> schur(u.matrix());
  const ComplexMatrix& t = schur.matrixT();
  const ComplexMatrix& q = schur.matrixU();
  std::vector<Eigenpair> pairs;
  pairs.reserve(static_cast<std::size_t>(u.dimension()));
  for (Eigen::Index k = 0; k < u.dimension(); ++k)
    pairs.push_back({phase_of(t(k, k)), q.col(k)});
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const Eigenpair& a, const Eigenpair& b) { return a.phase < b.phase; });
  return pairs;
}

inline ComplexMatrix reconstruct(const std::vector<Eigenpair>& pairs) {
  const Eigen::Index dim = pairs.empty() ? 0 : pairs.front().vector.size();
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  for (const auto& p : pairs)
    m += std::polar(1.0, 2.0 * std::numbers::pi * p.phase) * p.vector * p.vector.adjoint();
  return m;
}

// Reflection id - 2|psi><psi|.
inline Unitary state_reflection(const ComplexVector& psi) {
  require_state(psi);
  const auto dim = psi.size();
  return Unitary(ComplexMatrix::Identity(dim, dim) - 2.0 * psi * psi.adjoint());
}

// Reflection id - 2 Pi.
inline Unitary projector_reflection(const Projector& proj) {
  const auto dim = proj.dimension();
  return Unitary(ComplexMatrix::Identity(dim, dim) - 2.0 * proj.matrix());
}

struct GroverOperator {
  Unitary op;
  double p = 0.0;           // ||Pi psi||^2
  bool degenerate = false;  // p in {0, 1}: the Grover plane collapses to a line
};

/// G = -(id - 2|psi><psi|)(id - 2 Pi). On the plane spanned by psi and Pi psi
/// its eigenvalues are exp(+-2i arcsin(sqrt p)).
inline GroverOperator grover_operator(const ComplexVector& psi, const Projector& proj) {
  require_state(psi);
  if (proj.dimension() != psi.size())
    throw DimensionError("projector and state dimensions differ");
  const double p = std::clamp((proj.matrix() * psi).squaredNorm(), 0.0, 1.0);
  ComplexMatrix g = -(state_reflection(psi).matrix() * projector_reflection(proj).matrix());
  const bool degenerate = p <= kDegenerateProbability || p >= 1.0 - kDegenerateProbability;
  return {Unitary(std::move(g)), p, degenerate};
}

/// Eigenphases of the Grover operator restricted to its plane: the eigenvectors
/// that overlap psi.
inline std::vector<double> grover_plane_phases(const ComplexVector& psi, const Projector& proj) {
  const auto g = grover_operator(psi, proj);
  std::vector<double> phases;
  for (const auto& pair : eigendecompose_unitary(g.op))
    if (std::norm(pair.vector.dot(psi)) > 1e-8) phases.push_back(pair.phase);
  return phases;
}

/// Haar-like random unitary: QR orthonormalization of a complex Gaussian matrix.
inline Unitary random_unitary(Eigen::Index dim, RandomSource& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) a(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return Unitary(std::move(q));
}

inline ComplexVector random_state(Eigen::Index dim, RandomSource& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v / v.norm();
}

inline ComplexVector basis_state(Eigen::Index dim, Eigen::Index index) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(index) = 1.0;
  return v;
}

/// State of the two-dimensional Grover plane in an orthonormal basis
/// {|good>, |bad>}. `basis` records which pair of vectors the amplitudes refer to.
struct TwoLevelState {
  Complex good{1.0, 0.0};
  Complex bad{0.0, 0.0};
  std::string basis = "good/bad";

  static TwoLevelState from_amplitude(double p) {
    p = std::clamp(p, 0.0, 1.0);
    return {Complex(std::sqrt(p), 0.0), Complex(std::sqrt(1.0 - p), 0.0), "good/bad"};
  }

  double norm_squared() const { return std::norm(good) + std::norm(bad); }
  double overlap_squared(const TwoLevelState& other) const {
    return std::norm(std::conj(good) * other.good + std::conj(bad) * other.bad);
  }
  // The orthogonal complement of this state within the plane.
  TwoLevelState orthogonal() const {
    return {-std::conj(bad), std::conj(good), basis};
  }
};

/// Measures a plane state against {|u><u|, id - |u><u|}. Returns true when the
/// state collapses onto u; the state is replaced by the post-measurement state.
inline bool measure_along(TwoLevelState& state, const TwoLevelState& u, RandomSource& rng) {
  const double p = std::clamp(u.overlap_squared(state), 0.0, 1.0);
  bool hit;
  if (p >= 1.0 - kDegenerateProbability) hit = true;
  else if (p <= kDegenerateProbability) hit = false;
  else hit = rng.bernoulli(p);
  state = hit ? u : u.orthogonal();
  return hit;
}

}  // namespace qsa
