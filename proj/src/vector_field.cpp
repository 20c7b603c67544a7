#include "orb/vector_field.hpp"

#include <cmath>

#include "orb/partition.hpp"

namespace orb {

Mat VectorField::jacobian(const Vec& x) const {
    const int d = dim();
    Mat J(d, d);
    for (int j = 0; j < d; ++j) {
        Vec xp = x, xm = x;
        xp[j] += h_fd;
        xm[j] -= h_fd;
        J.col(j) = (eval(xp) - eval(xm)) / (2.0 * h_fd);
    }
    return J;
}

PolyVectorField::PolyVectorField(std::vector<Polynomial> components)
    : components_(std::move(components)) {}

std::shared_ptr<PolyVectorField> PolyVectorField::zero(int dim) {
    return std::make_shared<PolyVectorField>(std::vector<Polynomial>(static_cast<std::size_t>(dim),
                                                                     Polynomial(dim)));
}

std::shared_ptr<PolyVectorField> PolyVectorField::constant(const Vec& c) {
    std::vector<Polynomial> comps;
    for (Index i = 0; i < c.size(); ++i)
        comps.push_back(Polynomial::constant(static_cast<int>(c.size()), c[i]));
    return std::make_shared<PolyVectorField>(std::move(comps));
}

std::shared_ptr<PolyVectorField> PolyVectorField::linear(const Mat& A) {
    std::vector<Polynomial> comps;
    for (Index i = 0; i < A.rows(); ++i)
        comps.push_back(Polynomial::affine_form(A.row(i).transpose(), 0.0));
    return std::make_shared<PolyVectorField>(std::move(comps));
}

Vec PolyVectorField::eval(const Vec& x) const {
    Vec v(dim());
    for (int i = 0; i < dim(); ++i) v[i] = components_[static_cast<std::size_t>(i)](x);
    return v;
}

Mat PolyVectorField::jacobian(const Vec& x) const {
    Mat J(dim(), dim());
    for (int i = 0; i < dim(); ++i)
        for (int j = 0; j < dim(); ++j) J(i, j) = components_[static_cast<std::size_t>(i)].partial(j)(x);
    return J;
}

std::shared_ptr<PolyVectorField> PolyVectorField::conjugated(const Mat& B, const Mat& A,
                                                             const Vec& b) const {
    std::vector<Polynomial> comps(static_cast<std::size_t>(dim()), Polynomial(dim()));
    for (int i = 0; i < dim(); ++i) {
        Polynomial sum(dim());
        for (int j = 0; j < dim(); ++j) {
            if (B(i, j) == 0.0) continue;
            sum += components_[static_cast<std::size_t>(j)].compose_affine(A, b) * B(i, j);
        }
        comps[static_cast<std::size_t>(i)] = std::move(sum);
    }
    return std::make_shared<PolyVectorField>(std::move(comps));
}

std::shared_ptr<PolyVectorField> PolyVectorField::group_average(const FiniteGroup& group) const {
    std::vector<Polynomial> comps(static_cast<std::size_t>(dim()), Polynomial(dim()));
    for (const auto& g : group.elements()) {
        const Mat ginv = g.linear.transpose();
        auto term = conjugated(ginv, g.linear, g.translation);
        for (int i = 0; i < dim(); ++i)
            comps[static_cast<std::size_t>(i)] +=
                term->components()[static_cast<std::size_t>(i)] * (1.0 / static_cast<double>(group.order()));
    }
    return std::make_shared<PolyVectorField>(std::move(comps));
}

BumpVectorField::BumpVectorField(Vec center, double radius, Vec direction, double flat_top)
    : center_(std::move(center)), radius_(radius), direction_(std::move(direction)),
      flat_top_(flat_top) {
    if (radius_ <= 0.0) throw ValidationError("bump field: radius must be positive");
}

Vec BumpVectorField::eval(const Vec& x) const {
    const double r = (x - center_).norm() / radius_;
    return bump_profile(r, flat_top_) * direction_;
}

Mat BumpVectorField::jacobian(const Vec& x) const {
    const Vec diff = x - center_;
    const double dist = diff.norm();
    const double r = dist / radius_;
    Mat J = Mat::Zero(dim(), dim());
    if (dist < 1e-14) return J;  // flat top: derivative vanishes at the center
    const double dp = bump_profile_derivative(r, flat_top_) / radius_;
    return dp * direction_ * (diff / dist).transpose();
}

SumVectorField::SumVectorField(std::vector<std::pair<double, FieldPtr>> terms)
    : terms_(std::move(terms)) {
    if (terms_.empty()) throw ValidationError("sum field: no terms");
}

int SumVectorField::dim() const { return terms_.front().second->dim(); }

Vec SumVectorField::eval(const Vec& x) const {
    Vec v = Vec::Zero(dim());
    for (const auto& [a, f] : terms_) v += a * f->eval(x);
    return v;
}

Mat SumVectorField::jacobian(const Vec& x) const {
    Mat J = Mat::Zero(dim(), dim());
    for (const auto& [a, f] : terms_) J += a * f->jacobian(x);
    return J;
}

bool SumVectorField::analytic() const {
    for (const auto& [a, f] : terms_)
        if (!f->analytic()) return false;
    return true;
}

SampledVectorField::SampledVectorField(Vec lo, Vec hi, int per_axis, std::vector<Vec> values)
    : lo_(std::move(lo)), hi_(std::move(hi)), per_axis_(per_axis), values_(std::move(values)) {
    const auto expected = static_cast<std::size_t>(std::pow(per_axis_, lo_.size()));
    if (values_.size() != expected)
        throw ValidationError("sampled field: value count does not match the lattice");
}

std::shared_ptr<SampledVectorField> SampledVectorField::sample(
    const Region& region, int per_axis, const std::function<Vec(const Vec&)>& fn) {
    const int d = region.dim();
    const Vec lo = region.bounding_lo();
    const Vec hi = region.bounding_hi();
    const long total = static_cast<long>(std::pow(per_axis, d));
    std::vector<Vec> values(static_cast<std::size_t>(total));
    for (long n = 0; n < total; ++n) {
        long rest = n;
        Vec x(d);
        for (int i = 0; i < d; ++i) {
            const int k = static_cast<int>(rest % per_axis);
            rest /= per_axis;
            x[i] = lo[i] + (per_axis == 1 ? 0.5 : static_cast<double>(k) / (per_axis - 1)) * (hi[i] - lo[i]);
        }
        try {
            values[static_cast<std::size_t>(n)] = fn(x);
        } catch (const Error&) {
            values[static_cast<std::size_t>(n)] =
                Vec::Constant(d, std::numeric_limits<double>::quiet_NaN());
        }
    }
    return std::make_shared<SampledVectorField>(lo, hi, per_axis, std::move(values));
}

Vec SampledVectorField::node(const std::vector<int>& idx) const {
    Vec x(dim());
    for (int i = 0; i < dim(); ++i)
        x[i] = lo_[i] +
               (per_axis_ == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (per_axis_ - 1)) *
                   (hi_[i] - lo_[i]);
    return x;
}

std::size_t SampledVectorField::flat_index(const std::vector<int>& idx) const {
    std::size_t n = 0;
    for (int i = dim() - 1; i >= 0; --i)
        n = n * static_cast<std::size_t>(per_axis_) + static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
    return n;
}

Vec SampledVectorField::eval(const Vec& x) const {
    const int d = dim();
    std::vector<int> base(static_cast<std::size_t>(d));
    Vec w(d);
    for (int i = 0; i < d; ++i) {
        if (x[i] < lo_[i] - 1e-12 || x[i] > hi_[i] + 1e-12)
            throw DomainError("sampled field: query outside the lattice box");
        const double t = (per_axis_ == 1) ? 0.0 : (x[i] - lo_[i]) / (hi_[i] - lo_[i]) * (per_axis_ - 1);
        int k = static_cast<int>(std::floor(t));
        k = std::clamp(k, 0, per_axis_ - 2 >= 0 ? per_axis_ - 2 : 0);
        base[static_cast<std::size_t>(i)] = k;
        w[i] = std::clamp(t - k, 0.0, 1.0);
    }
    Vec value = Vec::Zero(d);
    const int corners = 1 << d;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::vector<int> idx = base;
        for (int i = 0; i < d; ++i) {
            if (c & (1 << i)) {
                idx[static_cast<std::size_t>(i)] = std::min(base[static_cast<std::size_t>(i)] + 1, per_axis_ - 1);
                weight *= w[i];
            } else {
                weight *= 1.0 - w[i];
            }
        }
        if (weight == 0.0) continue;
        const Vec& v = values_[flat_index(idx)];
        if (!v.allFinite())
            throw BudgetError("sampled field: interpolation cell touches an undefined node");
        value += weight * v;
    }
    return value;
}

std::vector<Vec> SampledVectorField::nodes() const {
    std::vector<Vec> out;
    const long total = static_cast<long>(values_.size());
    for (long n = 0; n < total; ++n) {
        if (!values_[static_cast<std::size_t>(n)].allFinite()) continue;
        long rest = n;
        std::vector<int> idx(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) {
            idx[static_cast<std::size_t>(i)] = static_cast<int>(rest % per_axis_);
            rest /= per_axis_;
        }
        out.push_back(node(idx));
    }
    return out;
}

double SampledVectorField::max_second_difference() const {
    double bound = 0.0;
    const long total = static_cast<long>(values_.size());
    for (long n = 0; n < total; ++n) {
        long rest = n;
        std::vector<int> idx(static_cast<std::size_t>(dim()));
        for (int i = 0; i < dim(); ++i) {
            idx[static_cast<std::size_t>(i)] = static_cast<int>(rest % per_axis_);
            rest /= per_axis_;
        }
        for (int axis = 0; axis < dim(); ++axis) {
            const int k = idx[static_cast<std::size_t>(axis)];
            if (k == 0 || k == per_axis_ - 1) continue;
            auto lo = idx, hi = idx;
            lo[static_cast<std::size_t>(axis)] = k - 1;
            hi[static_cast<std::size_t>(axis)] = k + 1;
            const Vec& a = values_[flat_index(lo)];
            const Vec& b = values_[static_cast<std::size_t>(n)];
            const Vec& c = values_[flat_index(hi)];
            if (!a.allFinite() || !b.allFinite() || !c.allFinite()) continue;
            bound = std::max(bound, (a - 2 * b + c).cwiseAbs().maxCoeff());
        }
    }
    return bound;
}

CallbackVectorField::CallbackVectorField(int dim, std::function<Vec(const Vec&)> fn)
    : dim_(dim), fn_(std::move(fn)) {}

FieldPtr field_scale(double a, const FieldPtr& f) {
    if (const auto* p = dynamic_cast<const PolyVectorField*>(f.get())) {
        std::vector<Polynomial> comps;
        for (const auto& c : p->components()) comps.push_back(c * a);
        return std::make_shared<PolyVectorField>(std::move(comps));
    }
    return std::make_shared<SumVectorField>(std::vector<std::pair<double, FieldPtr>>{{a, f}});
}

FieldPtr field_lincomb(double a, const FieldPtr& f, double b, const FieldPtr& g) {
    const auto* pf = dynamic_cast<const PolyVectorField*>(f.get());
    const auto* pg = dynamic_cast<const PolyVectorField*>(g.get());
    if (pf && pg) {
        std::vector<Polynomial> comps;
        for (std::size_t i = 0; i < pf->components().size(); ++i)
            comps.push_back(pf->components()[i] * a + pg->components()[i] * b);
        return std::make_shared<PolyVectorField>(std::move(comps));
    }
    return std::make_shared<SumVectorField>(std::vector<std::pair<double, FieldPtr>>{{a, f}, {b, g}});
}

double c1_norm(const VectorField& field, const Region& K, int per_axis) {
    double norm = 0.0;
    // the closed region: keep lattice points on the rim
    for (const Vec& x : grid_points(K, per_axis, -1e-12)) {
        norm = std::max(norm, field.eval(x).cwiseAbs().maxCoeff());
        norm = std::max(norm, field.jacobian(x).cwiseAbs().maxCoeff());
    }
    return norm;
}

}  // namespace orb
