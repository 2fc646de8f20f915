#include "chromonet/liouville.hpp"

namespace chromonet::liouville {

using cd = std::complex<double>;

Eigen::VectorXcd vec(const Eigen::MatrixXcd& x) {
    return Eigen::Map<const Eigen::VectorXcd>(x.data(), x.size());
}

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, Eigen::Index n) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), n, n);
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Eigen::MatrixXcd left(const Eigen::MatrixXcd& a) {
    return kron(Eigen::MatrixXcd::Identity(a.cols(), a.cols()), a);
}

Eigen::MatrixXcd right(const Eigen::MatrixXcd& b) {
    return kron(b.transpose(), Eigen::MatrixXcd::Identity(b.rows(), b.rows()));
}

Eigen::MatrixXcd commutator_generator(const Eigen::MatrixXcd& h) {
    return cd(0.0, -1.0) * (left(h) - right(h));
}

Eigen::MatrixXcd anticommutator_decay(const Eigen::MatrixXcd& r) {
    return -(left(r) + right(r));
}

}  // namespace chromonet::liouville
