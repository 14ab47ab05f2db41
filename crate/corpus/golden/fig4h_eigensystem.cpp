#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4h_eigensystem_result {
    Eigen::Matrix<double, 2, 2> Omega;
    Eigen::Matrix<double, 2, 2> ret;
};

fig4h_eigensystem_result fig4h_eigensystem(double k_1, double k_2, const Eigen::Matrix<double, 2, 1>& e_1, const Eigen::Matrix<double, 2, 1>& e_2)
{
    const Eigen::Matrix<double, 2, 2> Omega = (Eigen::MatrixXd(2, 2) << e_1, e_2).finished() * (Eigen::MatrixXd(2, 2) << k_1, 0LL, 0LL, k_2).finished() * (Eigen::MatrixXd(2, 2) << e_1.transpose(), e_2.transpose()).finished();
    return fig4h_eigensystem_result{Omega, Omega};
}
