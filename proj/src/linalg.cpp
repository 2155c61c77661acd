#include "ttrack/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace ttrack {

namespace {

double off_diagonal_norm(const Mat4& a) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Sym4Eigen jacobi_eigen_sym4(const Mat4& w) {
  const double scale = w.norm();
  Sym4Eigen out;
  if (scale == 0.0) {
    out.eigenvalues.setZero();
    out.eigenvectors.setIdentity();
    return out;
  }

  Mat4 a = w / scale;
  a = 0.5 * (a + a.transpose());
  Mat4 v = Mat4::Identity();

  constexpr double kOffTol = 1e-13;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(a) >= kOffTol; ++sweep) {
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < 4; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 4> order{0, 1, 2, 3};
  std::sort(order.begin(), order.end(),
            [&a](int i, int j) { return a(i, i) > a(j, j); });
  for (int i = 0; i < 4; ++i) {
    out.eigenvalues(i) = a(order[i], order[i]) * scale;
    out.eigenvectors.col(i) = v.col(order[i]).normalized();
  }
  return out;
}

std::pair<double, Vec4> max_eigenvector_sym4(const Mat4& w) {
  const double asym = (w - w.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(1.0, w.cwiseAbs().maxCoeff()))
    throw Error("max_eigenvector_sym4: input not symmetric");
  const Sym4Eigen e = jacobi_eigen_sym4(w);
  return {e.eigenvalues(0), e.eigenvectors.col(0)};
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) throw Error("matrix_exponential: matrix not square");

  // Scale so the [6/6] Pade approximant is accurate, then square back.
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.25) squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.25))));
  const Eigen::MatrixXd as = a / std::ldexp(1.0, squarings);

  // Pade [6/6]: N(A) = sum c_k A^k, D(A) = N(-A), exp(A) ~ D^{-1} N.
  constexpr std::array<double, 7> c = {1.0,
                                       0.5,
                                       5.0 / 44.0,
                                       1.0 / 66.0,
                                       1.0 / 792.0,
                                       1.0 / 15840.0,
                                       1.0 / 665280.0};
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = ident;
  Eigen::MatrixXd num = c[0] * ident;
  Eigen::MatrixXd den = c[0] * ident;
  double sign = 1.0;
  for (int k = 1; k <= 6; ++k) {
    power = power * as;
    sign = -sign;
    num += c[k] * power;
    den += sign * c[k] * power;
  }

  Eigen::MatrixXd result = den.partialPivLu().solve(num);
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace ttrack
