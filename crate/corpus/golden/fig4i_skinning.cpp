#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4i_skinning_result {
    double L;
    double ret;
};

fig4i_skinning_result fig4i_skinning(const Eigen::VectorXd& x, const Eigen::VectorXd& nu, const Eigen::MatrixXd& W)
{
    const long long n = static_cast<long long>(x.size());
    if (x.size() != n)
        throw std::invalid_argument("x: wrong length");
    if (nu.size() != n)
        throw std::invalid_argument("nu: wrong length");
    if (W.rows() != n || W.cols() != n)
        throw std::invalid_argument("W: wrong shape");

    const double L = (x.transpose() * W * x).value() + [&]() { double acc = 0.0; for (long long i = 1; i <= n; ++i) acc += nu(i - 1) * (std::pow(x(i - 1), 2) - 1LL); return acc; }();
    return fig4i_skinning_result{L, L};
}
