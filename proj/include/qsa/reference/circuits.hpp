#pragma once

// Gate-level statevector circuits for textbook phase and amplitude estimation.
// Slow and small; used only to check the closed-form outcome laws.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "qsa/error.hpp"
#include "qsa/phase.hpp"
#include "qsa/qcore.hpp"

namespace qsa::reference {

namespace detail {

// Register layout: index = c * d + s, counting value c in [0, t), system s in [0, d).
inline void hadamard(ComplexVector& v, int qubit, std::uint64_t d) {
  const std::uint64_t stride = (std::uint64_t{1} << qubit) * d;
  const double h = 1.0 / std::numbers::sqrt2;
  for (std::uint64_t base = 0; base < static_cast<std::uint64_t>(v.size()); base += 2 * stride)
    for (std::uint64_t k = base; k < base + stride; ++k) {
      const auto a = static_cast<Eigen::Index>(k);
      const auto b = static_cast<Eigen::Index>(k + stride);
      const Complex x = v(a), y = v(b);
      v(a) = h * (x + y);
      v(b) = h * (x - y);
    }
}

inline void controlled_phase(ComplexVector& v, int q1, int q2, double angle, std::uint64_t d) {
  const Complex w = std::polar(1.0, angle);
  const std::uint64_t mask = (std::uint64_t{1} << q1) | (std::uint64_t{1} << q2);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const std::uint64_t c = static_cast<std::uint64_t>(k) / d;
    if ((c & mask) == mask) v(k) *= w;
  }
}

inline void swap_qubits(ComplexVector& v, int q1, int q2, std::uint64_t d) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const std::uint64_t c = static_cast<std::uint64_t>(k) / d;
    const std::uint64_t s = static_cast<std::uint64_t>(k) % d;
    const bool b1 = (c >> q1) & 1, b2 = (c >> q2) & 1;
    if (b1 && !b2) {
      const std::uint64_t c2 = c ^ (std::uint64_t{1} << q1) ^ (std::uint64_t{1} << q2);
      std::swap(v(k), v(static_cast<Eigen::Index>(c2 * d + s)));
    }
  }
}

// Controlled-W on the system register, controlled by one counting qubit.
inline void controlled_unitary(ComplexVector& v, int qubit, const ComplexMatrix& w, std::uint64_t d) {
  const std::uint64_t t = static_cast<std::uint64_t>(v.size()) / d;
  for (std::uint64_t c = 0; c < t; ++c) {
    if (!((c >> qubit) & 1)) continue;
    auto block = v.segment(static_cast<Eigen::Index>(c * d), static_cast<Eigen::Index>(d));
    block = (w * block).eval();
  }
}

}  // namespace detail

/// Runs phase estimation with log2(t) counting qubits on (U, psi) and returns
/// the distribution of the measured counting register.
inline std::vector<double> phase_estimation_circuit(const Unitary& u, const ComplexVector& psi, std::uint64_t t) {
  const int n = exact_log2(t);
  require(n >= 1 && n <= 12, "counting register must have 1..12 qubits");
  require_state(psi);
  const auto d = static_cast<std::uint64_t>(u.dimension());
  if (static_cast<std::uint64_t>(psi.size()) != d) throw DimensionError("state and unitary dimensions differ");
  if (t * d > (std::uint64_t{1} << 20)) throw CapExceeded("circuit register too large");

  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(t * d));
  v.head(static_cast<Eigen::Index>(d)) = psi;
  for (int q = 0; q < n; ++q) detail::hadamard(v, q, d);
  ComplexMatrix power = u.matrix();
  for (int q = 0; q < n; ++q) {
    detail::controlled_unitary(v, q, power, d);
    power = (power * power).eval();
  }
  // Inverse QFT: undo the bit reversal, then the Hadamard/controlled-phase ladder backwards.
  for (int q = 0; q < n / 2; ++q) detail::swap_qubits(v, q, n - 1 - q, d);
  for (int q = 0; q < n; ++q) {
    for (int k = 0; k < q; ++k)
      detail::controlled_phase(v, k, q, -std::numbers::pi / static_cast<double>(std::uint64_t{1} << (q - k)), d);
    detail::hadamard(v, q, d);
  }

  std::vector<double> dist(t, 0.0);
  for (std::uint64_t c = 0; c < t; ++c)
    dist[c] = v.segment(static_cast<Eigen::Index>(c * d), static_cast<Eigen::Index>(d)).squaredNorm();
  return dist;
}

/// Phase estimation on U = diag(1, exp(2 pi i theta)) with eigenstate |1>.
inline std::vector<double> phase_estimation_circuit(double theta, std::uint64_t t) {
  ComplexMatrix u = ComplexMatrix::Identity(2, 2);
  u(1, 1) = std::polar(1.0, 2.0 * std::numbers::pi * theta);
  return phase_estimation_circuit(Unitary(std::move(u)), basis_state(2, 1), t);
}

/// Canonical amplitude estimation on psi = sqrt(1-p)|0> + sqrt(p)|1>, Pi = |1><1|.
/// Returns the outcome law on the folded values sin^2(pi i / t), i = 0..t/2.
inline std::vector<double> amplitude_estimation_circuit(double p, std::uint64_t t) {
  ComplexVector psi(2);
  psi << std::sqrt(1.0 - p), std::sqrt(p);
  const auto g = grover_operator(psi, Projector::onto_basis(2, {1}));
  const auto raw = phase_estimation_circuit(g.op, psi, t);
  std::vector<double> folded(t / 2 + 1, 0.0);
  for (std::uint64_t i = 0; i < t; ++i) folded[std::min(i, t - i)] += raw[i];
  return folded;
}

}  // namespace qsa::reference
