#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct fig4s_remeshing_result {
    double r;
    Eigen::Matrix<double, 3, 1> k;
    Eigen::Matrix<double, 3, 1> ret;
};

fig4s_remeshing_result fig4s_remeshing(double alpha, const Eigen::Matrix<double, 3, 1>& C, const Eigen::Matrix<double, 3, 1>& V)
{
    const double r = 1LL + alpha;
    const Eigen::Matrix<double, 3, 1> k = r * (C - V);
    return fig4s_remeshing_result{r, k, k};
}
