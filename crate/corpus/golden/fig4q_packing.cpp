#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4q_packing_result {
    double kappa_angle;
    double ret;
};

fig4q_packing_result fig4q_packing(double v, const Eigen::Matrix<double, 3, 3>& D_m, const Eigen::Matrix<double, 3, 3>& J)
{
    const double kappa_angle = 3LL * std::pow(2LL * v, static_cast<double>(3LL) / 2LL) * (1.0 / (static_cast<double>(1LL) / 4LL * std::pow(D_m.norm(), 2) - static_cast<double>(1LL) / 4LL * Eigen::MatrixXd(J * D_m.transpose() * D_m).trace()));
    return fig4q_packing_result{kappa_angle, kappa_angle};
}
