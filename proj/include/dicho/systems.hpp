#pragma once

#include <vector>

#include "dicho/linops.hpp"

namespace dicho {

Eigen::Matrix2d rotation2(double theta);

/// B_n = B for all n.
OperatorSequence constant_sequence(const Eigen::MatrixXd& b,
                                   Direction direction = Direction::Forward);

/// B_n = R(eta) diag(a, b): spectral splittings are constant, image
/// splittings tilt by eta per step (alignment defect 2(1-cos eta)).
OperatorSequence rotating_sequence(double eta, double a, double b);

/// B_n = Q_{n+1} D Q_n^T with Q_n the rotation by n*omega in the first two
/// coordinates; a change of basis of the constant diagonal system.
OperatorSequence conjugated_sequence(double omega, const Eigen::VectorXd& diag,
                                     Direction direction = Direction::Forward);

/// The alternating 2x2 pair whose per-step spectra are inside the unit disc
/// while the two-step products are diag(-1/64, -4).
OperatorSequence intro_example_sequence();

/// Finite list of matrices; indices beyond the list are contract errors.
OperatorSequence matrix_list_sequence(std::vector<Eigen::MatrixXd> mats,
                                      Direction direction = Direction::Forward);

}  // namespace dicho
