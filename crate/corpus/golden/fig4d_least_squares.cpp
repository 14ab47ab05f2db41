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

struct fig4d_least_squares_result {
    Eigen::VectorXd x_hat;
    Eigen::VectorXd ret;
};

fig4d_least_squares_result fig4d_least_squares(const std::vector<Eigen::VectorXd>& a, const std::vector<double>& y)
{
    const long long len_i = static_cast<long long>(a.size());
    if (a.empty())
        throw std::invalid_argument("cannot read dimension n from the empty sequence a");
    const long long n = static_cast<long long>(a[0].size());
    for (const auto& x : a) {
        if (x.size() != n)
            throw std::invalid_argument("a: wrong length");
    }
    if (static_cast<long long>(y.size()) != len_i)
        throw std::invalid_argument("y: wrong number of elements");

    const Eigen::VectorXd x_hat = Eigen::VectorXd(lina_solve([&]() { Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n); for (long long i = 1; i <= len_i; ++i) acc += a[i - 1] * a[i - 1].transpose(); return acc; }(), [&]() { Eigen::VectorXd acc = Eigen::VectorXd::Zero(n); for (long long i = 1; i <= len_i; ++i) acc += y[i - 1] * a[i - 1]; return acc; }()));
    return fig4d_least_squares_result{x_hat, x_hat};
}
