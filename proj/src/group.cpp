#include "orb/group.hpp"

#include <deque>

namespace orb {

GroupElement::GroupElement(Mat A, Vec b) : linear(std::move(A)), translation(std::move(b)) {
    const Mat gram = linear.transpose() * linear;
    const double residual = (gram - Mat::Identity(dim(), dim())).cwiseAbs().maxCoeff();
    if (residual >= tol().alg)
        throw ValidationError("GroupElement: linear part is not orthogonal (residual " +
                              std::to_string(residual) + ")");
}

GroupElement::GroupElement(Mat A) : GroupElement(Mat(A), Vec::Zero(A.rows())) {}

GroupElement GroupElement::identity(int dim) {
    return GroupElement(Mat::Identity(dim, dim), Vec::Zero(dim));
}

GroupElement GroupElement::compose(const GroupElement& other) const {
    return GroupElement(linear * other.linear, linear * other.translation + translation);
}

GroupElement GroupElement::inverse() const {
    const Mat inv = linear.transpose();
    return GroupElement(inv, -(inv * translation));
}

bool GroupElement::is_identity(double eps) const {
    return distance(GroupElement::identity(dim())) < eps;
}

double GroupElement::distance(const GroupElement& other) const {
    return std::max((linear - other.linear).cwiseAbs().maxCoeff(),
                    translation.size() > 0 ? (translation - other.translation).cwiseAbs().maxCoeff()
                                           : 0.0);
}

FiniteGroup FiniteGroup::generate(int dim, const std::vector<GroupElement>& generators,
                                  std::size_t max_order) {
    std::vector<GroupElement> closure;
    closure.push_back(GroupElement::identity(dim));
    std::deque<GroupElement> queue(generators.begin(), generators.end());
    const double eps = tol().alg;
    while (!queue.empty()) {
        GroupElement g = queue.front();
        queue.pop_front();
        bool known = false;
        for (const auto& h : closure) {
            if (g.distance(h) < eps) {
                known = true;
                break;
            }
        }
        if (known) continue;
        closure.push_back(g);
        if (closure.size() > max_order)
            throw ValidationError("FiniteGroup: generator closure exceeds max order " +
                                  std::to_string(max_order));
        for (const auto& h : closure) {
            queue.push_back(g.compose(h));
            queue.push_back(h.compose(g));
        }
        queue.push_back(g.inverse());
    }
    return from_elements(dim, std::move(closure));
}

FiniteGroup FiniteGroup::from_elements(int dim, std::vector<GroupElement> elements) {
    FiniteGroup g;
    g.dim_ = dim;
    g.elements_ = std::move(elements);
    if (g.elements_.empty()) g.elements_.push_back(GroupElement::identity(dim));
    // identity first
    const double eps = tol().alg;
    for (std::size_t i = 0; i < g.elements_.size(); ++i) {
        if (g.elements_[i].is_identity(eps)) {
            std::swap(g.elements_[0], g.elements_[i]);
            break;
        }
    }
    if (!g.elements_[0].is_identity(eps))
        throw ValidationError("FiniteGroup: element list does not contain the identity");
    g.build_tables();
    return g;
}

void FiniteGroup::build_tables() {
    const double eps = tol().alg;
    const std::size_t n = elements_.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (elements_[i].distance(elements_[j]) < eps)
                throw ValidationError("FiniteGroup: two elements coincide (action not effective)");
        }
    }
    cayley_.assign(n, std::vector<int>(n, -1));
    inverse_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const GroupElement prod = elements_[i].compose(elements_[j]);
            const int k = find(prod, eps);
            if (k < 0) throw ValidationError("FiniteGroup: not closed under composition");
            cayley_[i][j] = k;
            if (k == 0) inverse_[i] = static_cast<int>(j);
        }
        if (inverse_[i] < 0) throw ValidationError("FiniteGroup: element has no inverse in the list");
    }
}

int FiniteGroup::find(const GroupElement& g, double eps) const {
    int best = -1;
    double best_dist = eps;
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        const double d = elements_[i].distance(g);
        if (d < best_dist) {
            best_dist = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::vector<int> FiniteGroup::stabilizer_indices(const Vec& x, double eps) const {
    std::vector<int> idx;
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if ((elements_[i].apply(x) - x).norm() < eps) idx.push_back(static_cast<int>(i));
    }
    // subgroup check against the Cayley table
    for (int i : idx) {
        for (int j : idx) {
            const int k = product(i, j);
            bool inside = false;
            for (int m : idx) {
                if (m == k) inside = true;
            }
            if (!inside) throw ValidationError("stabilizer is not closed: numerically inconsistent point");
        }
    }
    return idx;
}

FiniteGroup FiniteGroup::subgroup(const std::vector<int>& indices) const {
    std::vector<GroupElement> elems;
    elems.reserve(indices.size());
    for (int i : indices) elems.push_back(elements_[static_cast<std::size_t>(i)]);
    return FiniteGroup::from_elements(dim_, std::move(elems));
}

Mat fixed_subspace(const std::vector<GroupElement>& elements, int dim) {
    Mat stacked(static_cast<Index>(elements.size()) * dim, dim);
    for (std::size_t k = 0; k < elements.size(); ++k)
        stacked.middleRows(static_cast<Index>(k) * dim, dim) =
            elements[k].linear - Mat::Identity(dim, dim);
    if (stacked.rows() == 0) return Mat::Identity(dim, dim);
    Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
    Index rank = 0;
    const double cutoff = 1e-9 * std::max(1.0, svd.singularValues().size() > 0 ? svd.singularValues()[0] : 1.0);
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()[i] > cutoff) ++rank;
    const Index nullity = dim - rank;
    Mat basis(dim, nullity);
    basis = svd.matrixV().rightCols(nullity);
    return basis;
}

Mat fixed_subspace(const FiniteGroup& group) {
    return fixed_subspace(group.elements(), group.dim());
}

double distance_to_subspace(const Vec& v, const Mat& basis) {
    if (basis.cols() == 0) return v.norm();
    return (v - basis * (basis.transpose() * v)).norm();
}

}  // namespace orb
