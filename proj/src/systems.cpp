#include "dicho/systems.hpp"

#include <cmath>
#include <memory>

namespace dicho {

Eigen::Matrix2d rotation2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

OperatorSequence constant_sequence(const Eigen::MatrixXd& b, Direction direction) {
  if (b.rows() != b.cols()) throw ContractError("constant_sequence: matrix must be square");
  const Eigen::MatrixXd copy = b;
  return OperatorSequence(static_cast<int>(b.rows()), direction,
                          [copy](int) { return copy; });
}

OperatorSequence rotating_sequence(double eta, double a, double b) {
  const Eigen::Matrix2d m = rotation2(eta) * Eigen::Vector2d(a, b).asDiagonal().toDenseMatrix();
  return OperatorSequence(2, Direction::Forward, [m](int) -> Eigen::MatrixXd { return m; });
}

OperatorSequence conjugated_sequence(double omega, const Eigen::VectorXd& diag,
                                     Direction direction) {
  const int d = static_cast<int>(diag.size());
  if (d < 2) throw ContractError("conjugated_sequence: need dimension >= 2");
  const Eigen::VectorXd dcopy = diag;
  auto q_at = [d, omega](int n) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Identity(d, d);
    q.topLeftCorner<2, 2>() = rotation2(omega * n);
    return q;
  };
  return OperatorSequence(d, direction, [dcopy, q_at](int n) -> Eigen::MatrixXd {
    return q_at(n + 1) * dcopy.asDiagonal() * q_at(n).transpose();
  });
}

OperatorSequence intro_example_sequence() {
  Eigen::Matrix2d even, odd;
  even << 0.0, -2.0, 0.125, 0.0;
  odd << 0.0, -0.125, 2.0, 0.0;
  return OperatorSequence(2, Direction::Forward, [even, odd](int n) -> Eigen::MatrixXd {
    return n % 2 == 0 ? even : odd;
  });
}

OperatorSequence matrix_list_sequence(std::vector<Eigen::MatrixXd> mats, Direction direction) {
  if (mats.empty()) throw ContractError("matrix_list_sequence: empty list");
  const int d = static_cast<int>(mats.front().rows());
  for (const auto& m : mats)
    if (m.rows() != d || m.cols() != d)
      throw ContractError("matrix_list_sequence: inconsistent shapes");
  auto shared = std::make_shared<std::vector<Eigen::MatrixXd>>(std::move(mats));
  return OperatorSequence(d, direction, [shared](int n) -> Eigen::MatrixXd {
    if (n < 0 || n >= static_cast<int>(shared->size()))
      throw ContractError("matrix_list_sequence: index " + std::to_string(n) +
                          " outside the provided list");
    return (*shared)[static_cast<std::size_t>(n)];
  });
}

}  // namespace dicho
