#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4o_triangle_normal_result {
    Eigen::Matrix<double, 3, 1> n;
    Eigen::Matrix<double, 3, 1> ret;
};

fig4o_triangle_normal_result fig4o_triangle_normal(const Eigen::Matrix<double, 3, 1>& a, const Eigen::Matrix<double, 3, 1>& b, const Eigen::Matrix<double, 3, 1>& c)
{
    const Eigen::Matrix<double, 3, 1> n = Eigen::Vector3d(b - a).cross(Eigen::Vector3d(c - a)) / Eigen::Vector3d(b - a).cross(Eigen::Vector3d(c - a)).norm();
    return fig4o_triangle_normal_result{n, n};
}
