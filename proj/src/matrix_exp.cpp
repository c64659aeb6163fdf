#include "swctrl/matrix_exp.hpp"

#include <cmath>
#include <stdexcept>

namespace swctrl {

Matrix matrix_exp(const Matrix& m, double t) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: matrix not square");
  const Index n = m.rows();
  const Matrix x = m * t;
  const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix a = x / std::ldexp(1.0, squarings);

  // Pade(6,6) coefficients c_k = (12-k)! 6! / (12! k! (6-k)!).
  constexpr double c[] = {1.0,
                          1.0 / 2.0,
                          5.0 / 44.0,
                          1.0 / 66.0,
                          1.0 / 792.0,
                          1.0 / 15840.0,
                          1.0 / 665280.0};
  const Matrix I = Matrix::Identity(n, n);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix even = c[0] * I + c[2] * a2 + c[4] * a4 + c[6] * a6;
  const Matrix odd = a * (c[1] * I + c[3] * a2 + c[5] * a4);
  Matrix result = (even - odd).partialPivLu().solve(even + odd);
  for (int k = 0; k < squarings; ++k) result = (result * result).eval();
  return result;
}

Matrix integrated_exp(const Matrix& m, double s) {
  const Index n = m.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = m;
  aug.topRightCorner(n, n) = Matrix::Identity(n, n);
  return matrix_exp(aug, s).topRightCorner(n, n);
}

}  // namespace swctrl
