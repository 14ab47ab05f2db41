#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4p_icp_result {
    double C;
    double ret;
};

fig4p_icp_result fig4p_icp(const Eigen::MatrixXd& c, const Eigen::MatrixXd& w, const Eigen::VectorXd& R_hat)
{
    const long long m = static_cast<long long>(c.rows());
    const long long k = static_cast<long long>(c.cols());
    if (c.rows() != m || c.cols() != k)
        throw std::invalid_argument("c: wrong shape");
    if (w.rows() != m || w.cols() != k)
        throw std::invalid_argument("w: wrong shape");
    if (R_hat.size() != m)
        throw std::invalid_argument("R_hat: wrong length");

    const double C = [&]() { double acc = 0.0; for (long long n = 1; n <= m; ++n) acc += [&]() { double acc = 0.0; for (long long i = 1; i <= k; ++i) acc += c(n - 1, i - 1) * w(n - 1, i - 1) * R_hat(n - 1); return acc; }(); return acc; }() / [&]() { double acc = 0.0; for (long long n = 1; n <= m; ++n) acc += [&]() { double acc = 0.0; for (long long i = 1; i <= k; ++i) acc += w(n - 1, i - 1) * R_hat(n - 1); return acc; }(); return acc; }();
    return fig4p_icp_result{C, C};
}
