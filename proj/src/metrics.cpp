// Copyright (C) 2026 the lpmrf authors
// SPDX-License-Identifier: Apache-2.0

#include "lpmrf/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace lpmrf::metrics {

namespace {

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i = std::abs(i) % period;
    return i < n ? i : period - i;
}

// Separable Gaussian filtering of one plane, reflect padded.
std::vector<double> gauss_filter(const std::vector<double>& in, int h, int w, int win,
                                 double sigma) {
    std::vector<double> k(size_t(win), 0.0);
    double sum = 0.0;
    for (int i = 0; i < win; ++i) {
        const double d = i - win / 2;
        k[size_t(i)] = std::exp(-0.5 * d * d / (sigma * sigma));
        sum += k[size_t(i)];
    }
    for (auto& v : k) v /= sum;

    const int r = win / 2;
    std::vector<double> tmp(size_t(h) * w, 0.0), out(size_t(h) * w, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += k[size_t(t + r)] * in[size_t(y) * w + reflect_index(x + t, w)];
            tmp[size_t(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int t = -r; t <= r; ++t)
                acc += k[size_t(t + r)] * tmp[size_t(reflect_index(y + t, h)) * w + x];
            out[size_t(y) * w + x] = acc;
        }
    return out;
}

// Mean luminance and contrast-structure terms of SSIM over one channel pair.
void ssim_channel(const std::vector<double>& x, const std::vector<double>& y, int h, int w,
                  const MsSsimConfig& cfg, double& mean_l, double& mean_cs) {
    const double c1 = cfg.k1 * cfg.k1;
    const double c2 = cfg.k2 * cfg.k2;
    std::vector<double> xx(x.size()), yy(y.size()), xy(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
    }
    const auto mx = gauss_filter(x, h, w, cfg.window, cfg.window_sigma);
    const auto my = gauss_filter(y, h, w, cfg.window, cfg.window_sigma);
    const auto mxx = gauss_filter(xx, h, w, cfg.window, cfg.window_sigma);
    const auto myy = gauss_filter(yy, h, w, cfg.window, cfg.window_sigma);
    const auto mxy = gauss_filter(xy, h, w, cfg.window, cfg.window_sigma);

    double acc_l = 0.0, acc_cs = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        const double vx = mxx[i] - mx[i] * mx[i];
        const double vy = myy[i] - my[i] * my[i];
        const double vxy = mxy[i] - mx[i] * my[i];
        acc_l += (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
        acc_cs += (2.0 * vxy + c2) / (vx + vy + c2);
    }
    mean_l = acc_l / double(x.size());
    mean_cs = acc_cs / double(x.size());
}

void downsample2(std::vector<double>& p, int& h, int& w) {
    const int oh = h / 2, ow = w / 2;
    std::vector<double> out(size_t(oh) * ow, 0.0);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            out[size_t(y) * ow + x] = 0.25 * (p[size_t(2 * y) * w + 2 * x] +
                                              p[size_t(2 * y) * w + 2 * x + 1] +
                                              p[size_t(2 * y + 1) * w + 2 * x] +
                                              p[size_t(2 * y + 1) * w + 2 * x + 1]);
    p = std::move(out);
    h = oh;
    w = ow;
}

Eigen::MatrixXd covariance(const Tensor<double>& f, double eps) {
    const int n = f.dim(0), d = f.dim(1);
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = f.at(i, j);
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;
    Eigen::MatrixXd cov = (x.transpose() * x) / double(n - 1);
    cov += eps * Eigen::MatrixXd::Identity(d, d);
    return cov;
}

double trace_sqrt_product_eigen(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(a);
    Eigen::VectorXd ev = es_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sqrt_a = es_a.eigenvectors() * ev.asDiagonal() *
                                   es_a.eigenvectors().transpose();
    Eigen::MatrixXd m = sqrt_a * b * sqrt_a;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_m(m);
    return es_m.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

void require_finite(const FeatureSet& s, const char* who) {
    LPMRF_REQUIRE(s.features.all_finite(), NumericError, who, ": non-finite features");
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    require_image(a, "psnr");
    LPMRF_REQUIRE(a.same_shape(b), ShapeError, "psnr: shape mismatch ", a.shape_str(), " vs ",
                  b.shape_str());
    const double mse = mean_squared_error(a, b);
    if (mse <= 1e-10) return 100.0;
    const double db = 10.0 * std::log10(1.0 / mse);
    return db > 100.0 ? 100.0 : db;
}

double ms_ssim(const Image& a, const Image& b, const MsSsimConfig& cfg) {
    require_image(a, "ms_ssim");
    LPMRF_REQUIRE(a.same_shape(b), ShapeError, "ms_ssim: shape mismatch");
    LPMRF_REQUIRE(cfg.scales >= 1 && cfg.scales <= 5, ParamError, "ms_ssim: scales must be 1..5");
    const int min_dim = std::min(a.dim(1), a.dim(2));
    LPMRF_REQUIRE(min_dim >= 8 << (cfg.scales - 1), ParamError, "ms_ssim: image ",
                  a.shape_str(), " too small for ", cfg.scales, " scales");

    // standard 5-scale weights, truncated and renormalized
    static const double kW[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
    std::vector<double> weights(kW, kW + cfg.scales);
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    for (auto& w : weights) w /= wsum;

    double result = 0.0;
    for (int c = 0; c < 3; ++c) {
        int h = a.dim(1), w = a.dim(2);
        std::vector<double> pa(size_t(h) * w), pb(size_t(h) * w);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                pa[size_t(y) * w + x] = a.at(c, y, x);
                pb[size_t(y) * w + x] = b.at(c, y, x);
            }
        double prod = 1.0;
        for (int s = 0; s < cfg.scales; ++s) {
            double ml = 0.0, mcs = 0.0;
            ssim_channel(pa, pb, h, w, cfg, ml, mcs);
            const bool last = (s == cfg.scales - 1);
            const double term = std::max(0.0, last ? ml * mcs : mcs);
            prod *= std::pow(term, weights[size_t(s)]);
            if (!last) {
                int hb = h, wb = w;
                downsample2(pa, h, w);
                downsample2(pb, hb, wb);
            }
        }
        result += prod;
    }
    return result / 3.0;
}

double trace_sqrt_product(const Tensor<double>& cov_a, const Tensor<double>& cov_b) {
    const int d = cov_a.dim(0);
    Eigen::MatrixXd a(d, d), b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            a(i, j) = cov_a.at(i, j);
            b(i, j) = cov_b.at(i, j);
        }
    return trace_sqrt_product_eigen(a, b);
}

double frechet_distance(const FeatureSet& a, const FeatureSet& b, double eps) {
    require_finite(a, "frechet_distance");
    require_finite(b, "frechet_distance");
    LPMRF_REQUIRE(a.dim() == b.dim(), ShapeError, "frechet_distance: dim mismatch ", a.dim(),
                  " vs ", b.dim());
    LPMRF_REQUIRE(a.count() >= 2 && b.count() >= 2, ParamError,
                  "frechet_distance: need at least 2 samples per set");

    const int d = a.dim();
    Eigen::VectorXd mu_a = Eigen::VectorXd::Zero(d), mu_b = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < a.count(); ++i)
        for (int j = 0; j < d; ++j) mu_a(j) += a.features.at(i, j);
    mu_a /= double(a.count());
    for (int i = 0; i < b.count(); ++i)
        for (int j = 0; j < d; ++j) mu_b(j) += b.features.at(i, j);
    mu_b /= double(b.count());

    const Eigen::MatrixXd cov_a = covariance(a.features, eps);
    const Eigen::MatrixXd cov_b = covariance(b.features, eps);

    const double mean_term = (mu_a - mu_b).squaredNorm();
    const double fd = mean_term + cov_a.trace() + cov_b.trace() -
                      2.0 * trace_sqrt_product_eigen(cov_a, cov_b);
    return fd < 0.0 ? 0.0 : fd;
}

double median_heuristic_bandwidth(const FeatureSet& a, const FeatureSet& b) {
    const int d = a.dim();
    // Deterministic cap on pooled points to keep the pairwise scan bounded.
    std::vector<const double*> rows;
    const int total = a.count() + b.count();
    const int cap = 2048;
    const int stride = total > cap ? (total + cap - 1) / cap : 1;
    for (int i = 0; i < a.count(); i += stride) rows.push_back(a.features.data() + int64_t(i) * d);
    for (int i = 0; i < b.count(); i += stride) rows.push_back(b.features.data() + int64_t(i) * d);

    std::vector<double> dists;
    dists.reserve(rows.size() * (rows.size() - 1) / 2);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = i + 1; j < rows.size(); ++j) {
            double s = 0.0;
            for (int q = 0; q < d; ++q) {
                const double df = rows[i][q] - rows[j][q];
                s += df * df;
            }
            if (s > 0.0) dists.push_back(std::sqrt(s));
        }
    LPMRF_REQUIRE(!dists.empty(), ParamError, "mmd: degenerate pooled set (all points equal)");
    std::nth_element(dists.begin(), dists.begin() + std::ptrdiff_t(dists.size() / 2), dists.end());
    return dists[dists.size() / 2];
}

double mmd_rbf(const FeatureSet& a, const FeatureSet& b, std::optional<double> bandwidth) {
    require_finite(a, "mmd_rbf");
    require_finite(b, "mmd_rbf");
    LPMRF_REQUIRE(a.dim() == b.dim(), ShapeError, "mmd_rbf: dim mismatch");
    const int m = a.count(), n = b.count(), d = a.dim();
    LPMRF_REQUIRE(m >= 2 && n >= 2, ParamError, "mmd_rbf: need at least 2 samples per set");

    const double sigma = bandwidth ? *bandwidth : median_heuristic_bandwidth(a, b);
    LPMRF_REQUIRE(sigma > 0.0, ParamError, "mmd_rbf: bandwidth must be > 0, got ", sigma);
    const double inv = 1.0 / (2.0 * sigma * sigma);

    auto sq = [&](const double* x, const double* y) {
        double s = 0.0;
        for (int q = 0; q < d; ++q) {
            const double df = x[q] - y[q];
            s += df * df;
        }
        return s;
    };

    double kaa = 0.0, kbb = 0.0, kab = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            kaa += std::exp(-sq(a.features.data() + int64_t(i) * d,
                                a.features.data() + int64_t(j) * d) * inv);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            kbb += std::exp(-sq(b.features.data() + int64_t(i) * d,
                                b.features.data() + int64_t(j) * d) * inv);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            kab += std::exp(-sq(a.features.data() + int64_t(i) * d,
                                b.features.data() + int64_t(j) * d) * inv);

    return 2.0 * kaa / (double(m) * (m - 1)) + 2.0 * kbb / (double(n) * (n - 1)) -
           2.0 * kab / (double(m) * n);
}

double ind_rmse(const Image& restored, const Image& pm_proxy) {
    require_image(restored, "ind_rmse");
    LPMRF_REQUIRE(restored.same_shape(pm_proxy), ShapeError, "ind_rmse: shape mismatch");
    return std::sqrt(mean_squared_error(restored, pm_proxy));
}

}  // namespace lpmrf::metrics
