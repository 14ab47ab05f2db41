#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

// Coordinate assembly; explicit zeros are dropped.
inline Eigen::SparseMatrix<double> lina_sparse(const std::map<std::vector<long long>, double>& entries, long long rows,
                                               long long cols)
{
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : entries)
        if (e.second != 0.0) t.emplace_back(e.first[0], e.first[1], e.second);
    Eigen::SparseMatrix<double> r(rows, cols);
    r.setFromTriplets(t.begin(), t.end());
    return r;
}

struct laplacian_result {
    Eigen::SparseMatrix<double> L;
    Eigen::SparseMatrix<double> ret;
};

laplacian_result laplacian(const std::set<std::vector<long long>>& E, long long n)
{
    if (n < 0) throw std::invalid_argument("dimension n must be nonnegative");
    for (const auto& t : E)
        if (t.size() != 2)
            throw std::invalid_argument("E: every tuple must have 2 entries");

    std::map<std::vector<long long>, double> L_entries;
    Eigen::SparseMatrix<double> L;
    for (const auto& t_2 : E) {
        const long long i = t_2[0], j = t_2[1];
        if (i < 1 || i > n || j < 1 || j > n)
            throw std::out_of_range("a tuple lies outside the matrix L");
        L_entries[{i - 1, j - 1}] = E.count(std::vector<long long>{i, j}) > 0 ? 1LL : 0LL;
    }
    L = lina_sparse(L_entries, n, n);
    for (long long i = 1; i <= n; ++i) {
        L_entries[{i - 1, i - 1}] = -[&]() { double acc = 0.0; for (long long j = 1; j <= n; ++j) if (j != i) acc += L.coeff(i - 1, j - 1); return acc; }();
    }
    L = lina_sparse(L_entries, n, n);
    return laplacian_result{L, L};
}
