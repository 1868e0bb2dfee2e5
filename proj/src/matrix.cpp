#include "softpulse/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "softpulse/errors.hpp"

namespace softpulse {

namespace {

CMatrix make_pauli(int axis) {
  CMatrix m(2, 2);
  switch (axis) {
    case 0:
      m << 0, 1, 1, 0;
      break;
    case 1:
      m << 0, Complex(0, -1), Complex(0, 1), 0;
      break;
    default:
      m << 1, 0, 0, -1;
      break;
  }
  return m;
}

}  // namespace

const CMatrix& pauli_x() {
  static const CMatrix m = make_pauli(0);
  return m;
}

const CMatrix& pauli_y() {
  static const CMatrix m = make_pauli(1);
  return m;
}

const CMatrix& pauli_z() {
  static const CMatrix m = make_pauli(2);
  return m;
}

const CMatrix& pauli(int axis) {
  switch (axis) {
    case 0:
      return pauli_x();
    case 1:
      return pauli_y();
    case 2:
      return pauli_z();
    default:
      throw std::out_of_range("pauli: axis must be 0, 1 or 2");
  }
}

const CMatrix& identity2() {
  static const CMatrix m = CMatrix::Identity(2, 2);
  return m;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix kron_embed(const CMatrix& op, int site, int n_qubits) {
  if (op.rows() != 2 || op.cols() != 2)
    throw std::invalid_argument("kron_embed: op must be 2x2");
  if (n_qubits < 1 || n_qubits > kMaxQubits)
    throw CapacityError("kron_embed: qubit count " + std::to_string(n_qubits) +
                        " outside [1, " + std::to_string(kMaxQubits) + "]");
  if (site < 0 || site >= n_qubits)
    throw std::out_of_range("kron_embed: site " + std::to_string(site) +
                            " outside [0, " + std::to_string(n_qubits) + ")");

  const long dim = 1L << n_qubits;
  const long mask = 1L << (n_qubits - 1 - site);  // slot 0 is the slowest bit
  CMatrix out = CMatrix::Zero(dim, dim);
  for (long i = 0; i < dim; ++i) {
    const int bi = (i & mask) ? 1 : 0;
    const long base = i & ~mask;
    out(i, base) = op(bi, 0);
    out(i, base | mask) = op(bi, 1);
  }
  return out;
}

double frobenius_norm(const CMatrix& m) { return m.norm(); }

double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double unitarity_error(const CMatrix& u) {
  CMatrix g = u.adjoint() * u;
  g -= CMatrix::Identity(u.rows(), u.cols());
  return max_abs(g);
}

CMatrix axis_rotation(double theta, double phi) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  CMatrix m(2, 2);
  // -i sin(t/2) (cos(phi) sx + sin(phi) sy) has off-diagonals -i s e^{-+i phi}
  m << Complex(c, 0), Complex(0, -s) * std::polar(1.0, -phi),
      Complex(0, -s) * std::polar(1.0, phi), Complex(c, 0);
  return m;
}

}  // namespace softpulse
