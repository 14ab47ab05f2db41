#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct matrix_c_result {
    Eigen::MatrixXd C;
    Eigen::MatrixXd ret;
};

matrix_c_result matrix_c(const Eigen::MatrixXd& M, const Eigen::VectorXd& y, const Eigen::VectorXd& x)
{
    const long long n = static_cast<long long>(M.rows());
    if (M.rows() != n || M.cols() != n)
        throw std::invalid_argument("M: wrong shape");
    if (y.size() != n)
        throw std::invalid_argument("y: wrong length");
    if (x.size() != n)
        throw std::invalid_argument("x: wrong length");

    const Eigen::MatrixXd C = (Eigen::MatrixXd(2 * n, 2 * n) << Eigen::MatrixXd::Identity(n, n), M + y * x.transpose(), M.transpose(), Eigen::MatrixXd::Zero(n, n)).finished();
    return matrix_c_result{C, C};
}
