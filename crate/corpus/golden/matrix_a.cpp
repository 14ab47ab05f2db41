#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

inline void lina_require(bool ok, const std::string& what)
{
    if (!ok) throw std::domain_error(what);
}

inline Eigen::MatrixXd lina_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != a.cols()) throw std::invalid_argument("solve needs a square matrix");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lina_require(lu.isInvertible(), "matrix is singular");
    return lu.solve(b);
}

struct matrix_a_result {
    Eigen::MatrixXd A;
    Eigen::MatrixXd ret;
};

matrix_a_result matrix_a(const Eigen::MatrixXd& M, const Eigen::MatrixXd& N)
{
    const long long n = static_cast<long long>(M.rows());
    if (M.rows() != n || M.cols() != n)
        throw std::invalid_argument("M: wrong shape");
    if (N.rows() != n || N.cols() != n)
        throw std::invalid_argument("N: wrong shape");

    const Eigen::MatrixXd A = lina_solve(N, M.transpose());
    return matrix_a_result{A, A};
}
