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

struct table1_result {
    double S;
    double ret;
};

table1_result table1(const Eigen::MatrixXd& H, const Eigen::VectorXd& beta, const Eigen::VectorXd& r, const Eigen::MatrixXd& V)
{
    const long long p = static_cast<long long>(H.rows());
    const long long n = static_cast<long long>(H.cols());
    if (H.rows() != p || H.cols() != n)
        throw std::invalid_argument("H: wrong shape");
    if (beta.size() != n)
        throw std::invalid_argument("beta: wrong length");
    if (r.size() != p)
        throw std::invalid_argument("r: wrong length");
    if (V.rows() != n || V.cols() != n)
        throw std::invalid_argument("V: wrong shape");

    const double S = ((H * beta - r).transpose() * Eigen::VectorXd(lina_solve(H * V * H.transpose(), H * beta - r))).value();
    return table1_result{S, S};
}
