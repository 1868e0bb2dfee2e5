#pragma once

#include <Eigen/Dense>
#include <complex>

namespace softpulse {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

// Largest supported cluster; matrices are dense, so dims stay <= 2^10.
inline constexpr int kMaxQubits = 10;

inline const Complex kImag{0.0, 1.0};

const CMatrix& pauli_x();
const CMatrix& pauli_y();
const CMatrix& pauli_z();
const CMatrix& pauli(int axis);  // 0 -> x, 1 -> y, 2 -> z
const CMatrix& identity2();

// Kronecker product; in a (x) b, a's indices are the slower ones.
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Embeds a 2x2 operator at tensor slot `site` of an n-qubit space,
// I (x) ... (x) op (x) ... (x) I.  Slot 0 is leftmost (slowest index).
CMatrix kron_embed(const CMatrix& op, int site, int n_qubits);

// sqrt of the sum of |M_ij|^2.
double frobenius_norm(const CMatrix& m);

// Largest entry modulus.
double max_abs(const CMatrix& m);

// Max-entry of U^dag U - I; zero for exactly unitary U.
double unitarity_error(const CMatrix& u);

// exp(-i theta/2 (cos(phi) sx + sin(phi) sy)): rotation by theta about an
// axis in the x-y plane.  Closed form, exact.
CMatrix axis_rotation(double theta, double phi);

}  // namespace softpulse
