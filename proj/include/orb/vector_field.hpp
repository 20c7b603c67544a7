#pragma once

#include <functional>
#include <memory>

#include "orb/group.hpp"
#include "orb/polynomial.hpp"
#include "orb/region.hpp"

namespace orb {

/// Chart-local vector field. Closed-form kinds carry analytic Jacobians;
/// the base class falls back to central finite differences.
class VectorField {
  public:
    virtual ~VectorField() = default;
    virtual int dim() const = 0;
    virtual Vec eval(const Vec& x) const = 0;
    virtual Mat jacobian(const Vec& x) const;
    virtual bool analytic() const { return false; }

    double h_fd = 1e-5;
};

using FieldPtr = std::shared_ptr<const VectorField>;

class PolyVectorField : public VectorField {
  public:
    explicit PolyVectorField(std::vector<Polynomial> components);
    static std::shared_ptr<PolyVectorField> zero(int dim);
    static std::shared_ptr<PolyVectorField> constant(const Vec& c);
    static std::shared_ptr<PolyVectorField> linear(const Mat& A);

    int dim() const override { return static_cast<int>(components_.size()); }
    Vec eval(const Vec& x) const override;
    Mat jacobian(const Vec& x) const override;
    bool analytic() const override { return true; }
    const std::vector<Polynomial>& components() const { return components_; }

    /// B f(A x + b): affine substitution with a linear frame change.
    std::shared_ptr<PolyVectorField> conjugated(const Mat& B, const Mat& A, const Vec& b) const;
    /// Projection onto the group-equivariant part: (1/|G|) sum_g g^{-1} f(g x).
    std::shared_ptr<PolyVectorField> group_average(const FiniteGroup& group) const;

  private:
    std::vector<Polynomial> components_;
};

/// Flat-top radial bump times a constant vector.
class BumpVectorField : public VectorField {
  public:
    BumpVectorField(Vec center, double radius, Vec direction, double flat_top = 0.5);
    int dim() const override { return static_cast<int>(center_.size()); }
    Vec eval(const Vec& x) const override;
    Mat jacobian(const Vec& x) const override;
    bool analytic() const override { return true; }
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }

  private:
    Vec center_;
    double radius_;
    Vec direction_;
    double flat_top_;
};

/// Linear combination sum_k a_k f_k.
class SumVectorField : public VectorField {
  public:
    explicit SumVectorField(std::vector<std::pair<double, FieldPtr>> terms);
    int dim() const override;
    Vec eval(const Vec& x) const override;
    Mat jacobian(const Vec& x) const override;
    bool analytic() const override;
    const std::vector<std::pair<double, FieldPtr>>& terms() const { return terms_; }

  private:
    std::vector<std::pair<double, FieldPtr>> terms_;
};

/// Values on a uniform lattice over a box, queried by piecewise-multilinear
/// interpolation (exact at the nodes).
class SampledVectorField : public VectorField {
  public:
    SampledVectorField(Vec lo, Vec hi, int per_axis, std::vector<Vec> values);
    /// Samples fn on the lattice of the bounding box of region.
    static std::shared_ptr<SampledVectorField> sample(const Region& region, int per_axis,
                                                      const std::function<Vec(const Vec&)>& fn);
    int dim() const override { return static_cast<int>(lo_.size()); }
    Vec eval(const Vec& x) const override;
    int per_axis() const { return per_axis_; }
    /// Lattice nodes where a finite value was recorded.
    std::vector<Vec> nodes() const;
    /// Max second difference of the values along the axes; h^2 |f''| scale,
    /// an a-posteriori bound for the multilinear interpolation error.
    double max_second_difference() const;

  private:
    Vec node(const std::vector<int>& idx) const;
    std::size_t flat_index(const std::vector<int>& idx) const;

    Vec lo_, hi_;
    int per_axis_;
    std::vector<Vec> values_;
};

class CallbackVectorField : public VectorField {
  public:
    CallbackVectorField(int dim, std::function<Vec(const Vec&)> fn);
    int dim() const override { return dim_; }
    Vec eval(const Vec& x) const override { return fn_(x); }

  private:
    int dim_;
    std::function<Vec(const Vec&)> fn_;
};

/// a f + b g with closed-form output when both inputs are polynomial.
FieldPtr field_lincomb(double a, const FieldPtr& f, double b, const FieldPtr& g);
FieldPtr field_scale(double a, const FieldPtr& f);

/// max over the grid of max-norm of values and first partials.
double c1_norm(const VectorField& field, const Region& K, int per_axis = 9);

}  // namespace orb
