#pragma once

#include <Eigen/Dense>

namespace chromonet::liouville {

// Column-major vectorization: vec(A X B) = (B^T (x) A) vec(X).
Eigen::VectorXcd vec(const Eigen::MatrixXcd& x);
Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index n);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// X -> A X
Eigen::MatrixXcd left(const Eigen::MatrixXcd& a);
// X -> X B
Eigen::MatrixXcd right(const Eigen::MatrixXcd& b);
// X -> -i [H, X]
Eigen::MatrixXcd commutator_generator(const Eigen::MatrixXcd& h);
// X -> -{R, X}
Eigen::MatrixXcd anticommutator_decay(const Eigen::MatrixXcd& r);

}  // namespace chromonet::liouville
