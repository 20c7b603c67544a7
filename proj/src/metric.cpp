#include "orb/metric.hpp"

#include <cmath>

namespace orb {

Mat MetricTensor::partial(const Vec& x, int k) const {
    Vec xp = x, xm = x;
    xp[k] += h_fd;
    xm[k] -= h_fd;
    return (eval(xp) - eval(xm)) / (2.0 * h_fd);
}

ConstantMetric::ConstantMetric(Mat M) : matrix_(std::move(M)) {
    check_spd(*this, Vec::Zero(dim()));
}

ConformalMetric::ConformalMetric(Polynomial phi) : phi_(std::move(phi)) {}

Mat ConformalMetric::eval(const Vec& x) const {
    return std::exp(2.0 * phi_(x)) * Mat::Identity(dim(), dim());
}

Mat ConformalMetric::partial(const Vec& x, int k) const {
    return 2.0 * phi_.partial(k)(x) * std::exp(2.0 * phi_(x)) * Mat::Identity(dim(), dim());
}

PolynomialMetric::PolynomialMetric(int dim, std::vector<std::vector<Polynomial>> entries)
    : dim_(dim), entries_(std::move(entries)) {}

Mat PolynomialMetric::eval(const Vec& x) const {
    Mat M(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            const auto& p = (j >= i) ? entries_[i][j - i] : entries_[j][i - j];
            M(i, j) = p(x);
        }
    return M;
}

Mat PolynomialMetric::partial(const Vec& x, int k) const {
    Mat M(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
            const auto& p = (j >= i) ? entries_[i][j - i] : entries_[j][i - j];
            M(i, j) = p.partial(k)(x);
        }
    return M;
}

AveragedMetric::AveragedMetric(std::shared_ptr<const MetricTensor> raw, FiniteGroup group)
    : raw_(std::move(raw)), group_(std::move(group)) {}

Mat AveragedMetric::eval(const Vec& x) const {
    Mat M = Mat::Zero(dim(), dim());
    for (const auto& g : group_.elements()) M += g.linear.transpose() * raw_->eval(g.apply(x)) * g.linear;
    return M / static_cast<double>(group_.order());
}

Mat AveragedMetric::partial(const Vec& x, int k) const {
    Mat M = Mat::Zero(dim(), dim());
    for (const auto& g : group_.elements()) {
        const Vec gx = g.apply(x);
        Mat chain = Mat::Zero(dim(), dim());
        for (int l = 0; l < dim(); ++l) chain += raw_->partial(gx, l) * g.linear(l, k);
        M += g.linear.transpose() * chain * g.linear;
    }
    return M / static_cast<double>(group_.order());
}

bool AveragedMetric::flat() const { return raw_->flat(); }

PullbackMetric::PullbackMetric(std::function<Vec(const Vec&)> map,
                               std::function<Mat(const Vec&)> jacobian,
                               std::shared_ptr<const MetricTensor> inner, bool affine)
    : map_(std::move(map)), jac_(std::move(jacobian)), inner_(std::move(inner)), affine_(affine) {
    if (!jac_) throw ValidationError("pullback_metric: lift has no Jacobian (unsupported lift)");
}

PullbackMetric PullbackMetric::along_affine(const Mat& A, const Vec& b,
                                            std::shared_ptr<const MetricTensor> inner) {
    return PullbackMetric([A, b](const Vec& x) { return Vec(A * x + b); },
                          [A](const Vec&) { return A; }, std::move(inner), true);
}

Mat PullbackMetric::eval(const Vec& x) const {
    const Mat J = jac_(x);
    return J.transpose() * inner_->eval(map_(x)) * J;
}

Mat PullbackMetric::partial(const Vec& x, int k) const {
    if (!affine_) return MetricTensor::partial(x, k);
    const Mat J = jac_(x);
    const Vec y = map_(x);
    Mat chain = Mat::Zero(dim(), dim());
    for (int l = 0; l < dim(); ++l) chain += inner_->partial(y, l) * J(l, k);
    return J.transpose() * chain * J;
}

Mat MetricField::eval(const Vec& x) const { return tensor->eval(x); }

double MetricField::norm(const Vec& x, const Vec& v) const {
    return std::sqrt(v.dot(tensor->eval(x) * v));
}

void check_spd(const MetricTensor& tensor, const Vec& x) {
    const Mat M = tensor.eval(x);
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym >= tol().alg) throw ValidationError("metric tensor not symmetric at a sample point");
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ValidationError("metric tensor not positive definite at a sample point");
}

std::vector<Mat> christoffel(const MetricField& metric, const Vec& x) {
    const int d = metric.tensor->dim();
    const Mat g = metric.tensor->eval(x);
    Eigen::LDLT<Mat> solver(g);
    if (solver.info() != Eigen::Success || !solver.isPositive())
        throw NumericalError("christoffel: singular metric matrix");
    std::vector<Mat> dg(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) dg[static_cast<std::size_t>(k)] = metric.tensor->partial(x, k);
    std::vector<Mat> gamma(static_cast<std::size_t>(d), Mat::Zero(d, d));
    // first-kind symbols, then raise the index
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            Vec lower(d);
            for (int l = 0; l < d; ++l)
                lower[l] = 0.5 * (dg[static_cast<std::size_t>(i)](j, l) + dg[static_cast<std::size_t>(j)](i, l) -
                                  dg[static_cast<std::size_t>(l)](i, j));
            const Vec raised = solver.solve(lower);
            for (int k = 0; k < d; ++k) gamma[static_cast<std::size_t>(k)](i, j) = raised[k];
        }
    }
    return gamma;
}

MetricField average_metric(const OrbifoldChart& chart, const MetricField& raw) {
    for (const Vec& x : grid_points(chart.domain, 5)) check_spd(*raw.tensor, x);
    // averaging a constant tensor stays constant; fold the sum symbolically
    if (const auto* c = dynamic_cast<const ConstantMetric*>(raw.tensor.get())) {
        Mat M = Mat::Zero(chart.dim(), chart.dim());
        for (const auto& g : chart.group.elements())
            M += g.linear.transpose() * c->matrix() * g.linear;
        M /= static_cast<double>(chart.group.order());
        return MetricField{chart.id, std::make_shared<ConstantMetric>(M)};
    }
    return MetricField{chart.id, std::make_shared<AveragedMetric>(raw.tensor, chart.group)};
}

double check_equivariance(const MetricField& metric, const OrbifoldChart& chart, int per_axis) {
    double residual = 0.0;
    for (const Vec& x : grid_points(chart.domain, per_axis)) {
        const Mat gx = metric.eval(x);
        for (const auto& g : chart.group.elements()) {
            const Mat gy = metric.eval(g.apply(x));
            residual = std::max(residual,
                                (g.linear.transpose() * gy * g.linear - gx).cwiseAbs().maxCoeff());
        }
    }
    return residual;
}

OrbifoldMetric::OrbifoldMetric(const Atlas& atlas, std::map<std::string, MetricField> fields)
    : fields_(std::move(fields)) {
    for (const auto& c : atlas.charts()) {
        if (!fields_.count(c.id))
            throw ValidationError("orbifold metric: no field for chart '" + c.id + "'");
        for (const Vec& x : grid_points(c.domain, 5)) check_spd(*fields_.at(c.id).tensor, x);
    }
    const double residual = check_compatibility(atlas, fields_);
    if (residual >= tol().metric)
        throw ValidationError("orbifold metric: change of charts not isometric (residual " +
                              std::to_string(residual) + ")");
}

const MetricField& OrbifoldMetric::field(const std::string& chart) const {
    auto it = fields_.find(chart);
    if (it == fields_.end()) throw DomainError("orbifold metric: no field for chart '" + chart + "'");
    return it->second;
}

bool OrbifoldMetric::flat() const {
    for (const auto& [id, f] : fields_)
        if (!f.flat()) return false;
    return true;
}

double check_compatibility(const Atlas& atlas, const std::map<std::string, MetricField>& fields,
                           int per_axis) {
    double residual = 0.0;
    for (const auto& ch : atlas.changes()) {
        const auto& gs = fields.at(ch.source);
        const auto& gt = fields.at(ch.target);
        const Mat A = ch.map.linear;
        for (const Vec& x : grid_points(ch.domain, per_axis)) {
            const Mat pulled = A.transpose() * gt.eval(ch.apply(x)) * A;
            residual = std::max(residual, (pulled - gs.eval(x)).cwiseAbs().maxCoeff());
        }
    }
    return residual;
}

MetricField pullback_metric(const GroupElement& lift, const MetricField& metric) {
    return pullback_metric_affine(lift.linear, lift.translation, metric);
}

MetricField pullback_metric_affine(const Mat& A, const Vec& b, const MetricField& metric) {
    return MetricField{metric.chart, std::make_shared<PullbackMetric>(
                                         PullbackMetric::along_affine(A, b, metric.tensor))};
}

MetricField pullback_metric(std::function<Vec(const Vec&)> lift,
                            std::function<Mat(const Vec&)> jacobian, const MetricField& metric) {
    return MetricField{metric.chart, std::make_shared<PullbackMetric>(std::move(lift), std::move(jacobian),
                                                                      metric.tensor, false)};
}

}  // namespace orb
