#pragma once
// Dense reference computations used by the unit and acceptance suites. They
// share no code with the library beyond the field containers.

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "pfm/mac_grid.hpp"

namespace pfm::oracle {

/// T0 exp(-A dt), the exact backward Jacobian for a constant velocity gradient.
inline Mat2 backward_jacobian(const Mat2& T0, const Mat2& A, double dt) {
  Eigen::Matrix2d a;
  a << A(0, 0), A(0, 1), A(1, 0), A(1, 1);
  const Eigen::Matrix2d e = (-dt * a).exp();
  return T0 * mat2(e(0, 0), e(0, 1), e(1, 0), e(1, 1));
}

/// Dense Helmholtz split on an nx x ny closed box. Interior faces are the
/// unknowns, D maps faces to cell divergence, G = -D^T, and
/// u = w - G (D G)^+ D w with the pseudo-inverse handling the constant mode.
class DenseHelmholtz {
 public:
  DenseHelmholtz(int nx, int ny, double dx) : nx_(nx), ny_(ny) {
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) faces_.push_back({true, i, j});
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) faces_.push_back({false, i, j});
    D_ = Eigen::MatrixXd::Zero(nx * ny, static_cast<Eigen::Index>(faces_.size()));
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      const Face& q = faces_[f];
      // The face is the high side of cell `lo` and the low side of cell `hi`.
      const int hi = q.j * nx + q.i;
      const int lo = q.is_u ? hi - 1 : hi - nx;
      D_(hi, static_cast<Eigen::Index>(f)) -= 1.0 / dx;
      D_(lo, static_cast<Eigen::Index>(f)) += 1.0 / dx;
    }
    solver_.compute(-D_ * D_.transpose());
  }

  void project(Field2& u, Field2& v) const {
    Eigen::VectorXd w(static_cast<Eigen::Index>(faces_.size()));
    for (std::size_t f = 0; f < faces_.size(); ++f) w[static_cast<Eigen::Index>(f)] = value(u, v, faces_[f]);
    const Eigen::VectorXd phi = solver_.solve(D_ * w);
    const Eigen::VectorXd out = w + D_.transpose() * phi;
    for (std::size_t f = 0; f < faces_.size(); ++f) value(u, v, faces_[f]) = out[static_cast<Eigen::Index>(f)];
    MacGrid::zero_boundary_normals(u, v);
  }

 private:
  struct Face {
    bool is_u;
    int i, j;
  };
  static double& value(Field2& u, Field2& v, const Face& q) { return q.is_u ? u(q.i, q.j) : v(q.i, q.j); }

  int nx_, ny_;
  std::vector<Face> faces_;
  Eigen::MatrixXd D_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> solver_;
};

}  // namespace pfm::oracle
