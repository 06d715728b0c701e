#include "oracle.hpp"

#include <cmath>

namespace oracle {

namespace {
double tie(const BinaryMatrix& x, int i, int j) { return i != j && x(i, j) ? 1.0 : 0.0; }
}  // namespace

double outdegree(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) s += tie(x, i, j);
    return s;
}

double reciprocity(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) s += tie(x, i, j) * tie(x, j, i);
    return s;
}

double transitive_triples(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j)
        for (int h = 0; h < x.n(); ++h) {
            if (j == i || h == i || h == j) continue;
            s += tie(x, i, j) * tie(x, i, h) * tie(x, h, j);
        }
    return s;
}

double transitive_recip_triples(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j)
        for (int h = 0; h < x.n(); ++h) {
            if (j == i || h == i || h == j) continue;
            s += tie(x, i, j) * tie(x, j, i) * tie(x, i, h) * tie(x, h, j);
        }
    return s;
}

double indegree_popularity(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        double indeg = 0.0;
        for (int h = 0; h < x.n(); ++h) indeg += tie(x, h, j);
        s += tie(x, i, j) * indeg;
    }
    return s;
}

double outdegree_popularity(const BinaryMatrix& x, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        double outdeg = 0.0;
        for (int h = 0; h < x.n(); ++h) outdeg += tie(x, j, h);
        s += tie(x, i, j) * outdeg;
    }
    return s;
}

double outdegree_activity(const BinaryMatrix& x, int i) {
    const double d = outdegree(x, i);
    return d * d;
}

double covariate_alter(const BinaryMatrix& x, const std::vector<double>& v, double mean, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) s += tie(x, i, j) * (v[j] - mean);
    return s;
}

double covariate_ego(const BinaryMatrix& x, const std::vector<double>& v, double mean, int i) {
    return (v[i] - mean) * outdegree(x, i);
}

double covariate_same(const BinaryMatrix& x, const std::vector<double>& v, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) s += tie(x, i, j) * (v[i] == v[j] ? 1.0 : 0.0);
    return s;
}

double covariate_similarity(const BinaryMatrix& x, const std::vector<double>& v, double range,
                            double sim_mean, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j)
        s += tie(x, i, j) * (1.0 - std::abs(v[i] - v[j]) / range - sim_mean);
    return s;
}

double dyadic_covariate(const BinaryMatrix& x, const RealMatrix& w, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) s += tie(x, i, j) * (i != j ? w(i, j) : 0.0);
    return s;
}

double friends_of_partner(const BinaryMatrix& x, const RealMatrix& p, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        double inner = 0.0;
        for (int h = 0; h < x.n(); ++h) inner += p(i, h) * tie(x, h, j);
        s += tie(x, i, j) * inner;
    }
    return s;
}

double partner_of_friend(const BinaryMatrix& x, const RealMatrix& p, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        double inner = 0.0;
        for (int h = 0; h < x.n(); ++h) inner += tie(x, i, h) * p(h, j);
        s += tie(x, i, j) * inner;
    }
    return s;
}

double couple_four_cycle(const BinaryMatrix& x, const RealMatrix& p, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        double inner = 0.0;
        for (int h = 0; h < x.n(); ++h)
            for (int k = 0; k < x.n(); ++k) inner += p(i, h) * tie(x, h, k) * p(k, j);
        s += tie(x, i, j) * inner;
    }
    return s;
}

double couple_four_cycle_same_gender(const BinaryMatrix& x, const RealMatrix& p,
                                     const std::vector<double>& gender, int i) {
    double s = 0.0;
    for (int j = 0; j < x.n(); ++j) {
        if (gender[i] != gender[j]) continue;
        double inner = 0.0;
        for (int h = 0; h < x.n(); ++h)
            for (int k = 0; k < x.n(); ++k) inner += p(i, h) * tie(x, h, k) * p(k, j);
        s += tie(x, i, j) * inner;
    }
    return s;
}

double mutual_with_lower(const BinaryMatrix& strong, const BinaryMatrix& weak, int i) {
    double s = 0.0;
    for (int j = 0; j < strong.n(); ++j) s += tie(strong, i, j) * tie(weak, j, i);
    return s;
}

double linear_shape(const std::vector<int>& z, double zbar, int i) { return z[i] - zbar; }

double quadratic_shape(const std::vector<int>& z, double zbar, int i) {
    return (z[i] - zbar) * (z[i] - zbar);
}

double reciprocated_degree(const BinaryMatrix& x, const std::vector<int>& z, double zbar, int i) {
    return (z[i] - zbar) * reciprocity(x, i);
}

double dense_triads(const BinaryMatrix& x, const std::vector<int>& z, double zbar, int i) {
    int count = 0;
    const int n = x.n();
    for (int j = 0; j < n; ++j)
        for (int h = j + 1; h < n; ++h) {
            if (j == i || h == i) continue;
            const double ties = tie(x, i, j) + tie(x, j, i) + tie(x, i, h) + tie(x, h, i) +
                                tie(x, j, h) + tie(x, h, j);
            if (ties >= 5.0) ++count;
        }
    return (z[i] - zbar) * count;
}

double average_similarity(const RealMatrix& w, const std::vector<int>& z, double range,
                          double sim_mean, int i) {
    double weight = 0.0, total = 0.0;
    for (int j = 0; j < w.n(); ++j) {
        if (j == i || w(i, j) <= 0.0) continue;
        weight += w(i, j);
        total += w(i, j) * (1.0 - std::abs(z[i] - z[j]) / range - sim_mean);
    }
    return weight > 0.0 ? total / weight : 0.0;
}

double outdegree_isolate(const BinaryMatrix& x, const std::vector<int>& z, int i) {
    return outdegree(x, i) == 0.0 ? static_cast<double>(z[i]) : 0.0;
}

}  // namespace oracle
