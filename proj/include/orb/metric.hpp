#pragma once

#include <functional>
#include <memory>

#include "orb/atlas.hpp"
#include "orb/polynomial.hpp"

namespace orb {

/// Pointwise symmetric positive definite tensor on a chart domain. Closed
/// form kinds carry analytic partial derivatives; everything else falls back
/// to central finite differences with step h_fd.
class MetricTensor {
  public:
    virtual ~MetricTensor() = default;
    virtual int dim() const = 0;
    virtual Mat eval(const Vec& x) const = 0;
    /// d/dx_k of the matrix; default central finite difference.
    virtual Mat partial(const Vec& x, int k) const;
    virtual bool analytic() const { return false; }
    virtual bool flat() const { return false; }

    double h_fd = 1e-5;
};

class ConstantMetric : public MetricTensor {
  public:
    explicit ConstantMetric(Mat M);
    int dim() const override { return static_cast<int>(matrix_.rows()); }
    Mat eval(const Vec&) const override { return matrix_; }
    Mat partial(const Vec&, int) const override { return Mat::Zero(dim(), dim()); }
    bool analytic() const override { return true; }
    bool flat() const override { return true; }
    const Mat& matrix() const { return matrix_; }

  private:
    Mat matrix_;
};

/// g = e^{2 phi(x)} I with polynomial phi.
class ConformalMetric : public MetricTensor {
  public:
    explicit ConformalMetric(Polynomial phi);
    int dim() const override { return phi_.dim(); }
    Mat eval(const Vec& x) const override;
    Mat partial(const Vec& x, int k) const override;
    bool analytic() const override { return true; }
    const Polynomial& phi() const { return phi_; }

  private:
    Polynomial phi_;
};

/// Entries g_ij given as polynomials (upper triangle, symmetrized).
class PolynomialMetric : public MetricTensor {
  public:
    PolynomialMetric(int dim, std::vector<std::vector<Polynomial>> entries);
    int dim() const override { return dim_; }
    Mat eval(const Vec& x) const override;
    Mat partial(const Vec& x, int k) const override;
    bool analytic() const override { return true; }

  private:
    int dim_;
    std::vector<std::vector<Polynomial>> entries_;
};

/// Group average (1/|G|) sum_g A_g^T M(g x) A_g of an inner tensor.
class AveragedMetric : public MetricTensor {
  public:
    AveragedMetric(std::shared_ptr<const MetricTensor> raw, FiniteGroup group);
    int dim() const override { return raw_->dim(); }
    Mat eval(const Vec& x) const override;
    Mat partial(const Vec& x, int k) const override;
    bool analytic() const override { return raw_->analytic(); }
    bool flat() const override;

  private:
    std::shared_ptr<const MetricTensor> raw_;
    FiniteGroup group_;
};

/// Pullback (phi^* g)_x = Dphi(x)^T g(phi(x)) Dphi(x) along a differentiable
/// lift given by callables (affine lifts get exact Jacobians).
class PullbackMetric : public MetricTensor {
  public:
    PullbackMetric(std::function<Vec(const Vec&)> map, std::function<Mat(const Vec&)> jacobian,
                   std::shared_ptr<const MetricTensor> inner, bool affine);
    static PullbackMetric along_affine(const Mat& A, const Vec& b,
                                       std::shared_ptr<const MetricTensor> inner);
    int dim() const override { return inner_->dim(); }
    Mat eval(const Vec& x) const override;
    Mat partial(const Vec& x, int k) const override;
    bool analytic() const override { return affine_ && inner_->analytic(); }

  private:
    std::function<Vec(const Vec&)> map_;
    std::function<Mat(const Vec&)> jac_;
    std::shared_ptr<const MetricTensor> inner_;
    bool affine_;
};

/// Metric on one chart.
struct MetricField {
    std::string chart;
    std::shared_ptr<const MetricTensor> tensor;

    Mat eval(const Vec& x) const;
    bool flat() const { return tensor->flat(); }
    /// |v|_g at x.
    double norm(const Vec& x, const Vec& v) const;
};

/// Validates SPD and symmetry of the tensor at x (throws ValidationError).
void check_spd(const MetricTensor& tensor, const Vec& x);

/// Christoffel symbols of the Levi-Civita connection at x.
/// gamma[k](i,j) = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij).
std::vector<Mat> christoffel(const MetricField& metric, const Vec& x);

/// Group-averaged metric; equals the input when it is already invariant.
MetricField average_metric(const OrbifoldChart& chart, const MetricField& raw);

/// Max residual |g_{gx}(Av, Aw) - g_x(v, w)| over grid points, group
/// elements and coordinate basis pairs.
double check_equivariance(const MetricField& metric, const OrbifoldChart& chart, int per_axis = 9);

/// Per-chart family of metrics; construction verifies that every declared
/// change of charts is a Riemannian embedding within tol_metric.
class OrbifoldMetric {
  public:
    OrbifoldMetric() = default;
    OrbifoldMetric(const Atlas& atlas, std::map<std::string, MetricField> fields);

    const MetricField& field(const std::string& chart) const;
    const std::map<std::string, MetricField>& fields() const { return fields_; }
    bool flat() const;

  private:
    std::map<std::string, MetricField> fields_;
};

/// Max compatibility residual over declared changes (free function so that a
/// deliberately mismatched family can be measured without constructing an
/// OrbifoldMetric).
double check_compatibility(const Atlas& atlas, const std::map<std::string, MetricField>& fields,
                           int per_axis = 9);

MetricField pullback_metric(const GroupElement& lift, const MetricField& metric);
/// Pullback along a general affine map x -> A x + b (not necessarily an
/// isometry), with exact Jacobian.
MetricField pullback_metric_affine(const Mat& A, const Vec& b, const MetricField& metric);
MetricField pullback_metric(std::function<Vec(const Vec&)> lift,
                            std::function<Mat(const Vec&)> jacobian, const MetricField& metric);

}  // namespace orb
