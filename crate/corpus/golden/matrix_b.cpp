#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

struct matrix_b_result {
    Eigen::Matrix<double, 2, 2> B;
    Eigen::Matrix<double, 2, 2> ret;
};

matrix_b_result matrix_b(double a, double k)
{
    const Eigen::Matrix<double, 2, 2> B = (Eigen::MatrixXd(2, 2) << 2LL * a, 0LL, 3LL, k + 1LL).finished();
    return matrix_b_result{B, B};
}
