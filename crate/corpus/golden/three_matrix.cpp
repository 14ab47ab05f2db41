#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct three_matrix_result {
    Eigen::Matrix<double, 3, 2> D;
    double c;
    double ret;
};

three_matrix_result three_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& C, const Eigen::Matrix<double, 2, 1>& x)
{
    const long long n = static_cast<long long>(A.cols());
    const long long m = static_cast<long long>(B.cols());
    if (A.rows() != 3 || A.cols() != n)
        throw std::invalid_argument("A: wrong shape");
    if (B.rows() != n || B.cols() != m)
        throw std::invalid_argument("B: wrong shape");
    if (C.rows() != m || C.cols() != 2)
        throw std::invalid_argument("C: wrong shape");

    const Eigen::Matrix<double, 3, 2> D = A * B * C;
    const double c = (x.transpose() * D.transpose() * D * x).value();
    return three_matrix_result{D, c, c};
}
