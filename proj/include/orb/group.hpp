#pragma once

#include <vector>

#include "orb/types.hpp"

namespace orb {

/// Affine isometry x -> A x + b with orthogonal linear part. Group elements
/// of good charts have b = 0; translations appear in changes of charts.
struct GroupElement {
    Mat linear;
    Vec translation;

    GroupElement() = default;
    GroupElement(Mat A, Vec b);
    explicit GroupElement(Mat A);

    static GroupElement identity(int dim);

    int dim() const { return static_cast<int>(linear.rows()); }
    Vec apply(const Vec& x) const { return linear * x + translation; }
    /// Derived action on tangent vectors.
    Vec apply_tangent(const Vec& v) const { return linear * v; }
    GroupElement compose(const GroupElement& other) const;  // this after other
    GroupElement inverse() const;
    bool is_identity(double eps) const;
    double distance(const GroupElement& other) const;
};

/// Finite group of affine isometries with an explicit Cayley table built at
/// construction by nearest-element matching. Construction throws when the
/// generated set does not close, is not effective, or exceeds max_order.
class FiniteGroup {
  public:
    FiniteGroup() = default;
    /// Closure of the generators (identity is always added first).
    static FiniteGroup generate(int dim, const std::vector<GroupElement>& generators,
                                std::size_t max_order = 512);
    /// Wrap an explicit element list; validates the group axioms.
    static FiniteGroup from_elements(int dim, std::vector<GroupElement> elements);

    int dim() const { return dim_; }
    std::size_t order() const { return elements_.size(); }
    const std::vector<GroupElement>& elements() const { return elements_; }
    const GroupElement& element(std::size_t i) const { return elements_[i]; }
    bool trivial() const { return elements_.size() <= 1; }

    /// Index of the product elements[i] ∘ elements[j] in the element list.
    int product(int i, int j) const { return cayley_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
    int inverse_index(int i) const { return inverse_[static_cast<std::size_t>(i)]; }
    /// Index of the element closest to g, or -1 when no element matches
    /// within eps.
    int find(const GroupElement& g, double eps) const;

    /// Indices forming the stabilizer of x; verified to be a subgroup via the
    /// Cayley table.
    std::vector<int> stabilizer_indices(const Vec& x, double eps) const;
    FiniteGroup subgroup(const std::vector<int>& indices) const;

  private:
    void build_tables();

    int dim_ = 0;
    std::vector<GroupElement> elements_;
    std::vector<std::vector<int>> cayley_;
    std::vector<int> inverse_;
};

/// Orthonormal basis of the subspace fixed by the linear parts of all given
/// elements: intersection of the kernels of (A_g - I).
Mat fixed_subspace(const std::vector<GroupElement>& elements, int dim);
Mat fixed_subspace(const FiniteGroup& group);

/// Distance from v to the column space of basis (empty basis: |v|).
double distance_to_subspace(const Vec& v, const Mat& basis);

}  // namespace orb
