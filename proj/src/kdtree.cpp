#include "meshless/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "meshless/errors.hpp"

namespace meshless {

namespace {

// Heap ordering: the "worst" candidate (largest distance, then largest index)
// sits on top so it can be evicted first.
inline bool worse(const std::pair<double, int>& a, const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
}

}  // namespace

KdTree::KdTree(const Eigen::MatrixXd& points) : pts_(points) {
    const int n = static_cast<int>(pts_.rows());
    if (n == 0) return;
    for (long i = 0; i < pts_.rows(); ++i)
        for (long j = 0; j < pts_.cols(); ++j)
            if (!std::isfinite(pts_(i, j)))
                throw ParameterError("kdtree: non-finite coordinate");
    order_.resize(static_cast<size_t>(n));
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(static_cast<size_t>(2 * n / kLeafSize + 2));
    root_ = build(0, n);
}

int KdTree::build(int begin, int end) {
    Node node;
    if (end - begin <= kLeafSize) {
        node.begin = begin;
        node.end = end;
        // Fixed leaf order keeps scans deterministic.
        std::sort(order_.begin() + begin, order_.begin() + end);
        nodes_.push_back(node);
        return static_cast<int>(nodes_.size()) - 1;
    }
    const int d = dim();
    // Split on the widest axis at the median.
    double lo[2], hi[2];
    for (int a = 0; a < d; ++a) {
        lo[a] = std::numeric_limits<double>::infinity();
        hi[a] = -std::numeric_limits<double>::infinity();
    }
    for (int i = begin; i < end; ++i)
        for (int a = 0; a < d; ++a) {
            double v = pts_(order_[static_cast<size_t>(i)], a);
            lo[a] = std::min(lo[a], v);
            hi[a] = std::max(hi[a], v);
        }
    int axis = 0;
    for (int a = 1; a < d; ++a)
        if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    int mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [this, axis](int a, int b) {
                         double va = pts_(a, axis), vb = pts_(b, axis);
                         if (va != vb) return va < vb;
                         return a < b;
                     });
    node.axis = axis;
    node.split = pts_(order_[static_cast<size_t>(mid)], axis);
    int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    int left = build(begin, mid);
    int right = build(mid, end);
    nodes_[static_cast<size_t>(self)].left = left;
    nodes_[static_cast<size_t>(self)].right = right;
    return self;
}

void KdTree::search(int node_id, const double* q, int k,
                    std::vector<std::pair<double, int>>& heap) const {
    const Node& node = nodes_[static_cast<size_t>(node_id)];
    const int d = dim();
    if (node.axis < 0) {
        for (int i = node.begin; i < node.end; ++i) {
            int idx = order_[static_cast<size_t>(i)];
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                double diff = q[a] - pts_(idx, a);
                dist2 += diff * diff;
            }
            std::pair<double, int> cand(dist2, idx);
            if (static_cast<int>(heap.size()) < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), worse);
            } else if (worse(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), worse);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), worse);
            }
        }
        return;
    }
    const int axis = node.axis;
    const double qa = q[axis];
    int near = node.left, far = node.right;
    if (qa > node.split) std::swap(near, far);
    search(near, q, k, heap);
    // Visit the far side unless every point there is strictly farther than the
    // current worst kept candidate. Equal distances must still be visited so
    // the index tie rule sees all candidates.
    double gap = qa - node.split;
    double gap2 = gap * gap;
    if (static_cast<int>(heap.size()) < k || gap2 <= heap.front().first)
        search(far, q, k, heap);
}

void KdTree::query(const double* q, int k, std::vector<int>& indices,
                   std::vector<double>& dist2) const {
    if (k > size())
        throw SizeError("kdtree: requested " + std::to_string(k) + " neighbors from " +
                        std::to_string(size()) + " points");
    indices.clear();
    dist2.clear();
    if (k <= 0) return;
    std::vector<std::pair<double, int>> heap;
    heap.reserve(static_cast<size_t>(k));
    search(root_, q, k, heap);
    std::sort(heap.begin(), heap.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second < b.second;
    });
    indices.resize(heap.size());
    dist2.resize(heap.size());
    for (size_t i = 0; i < heap.size(); ++i) {
        dist2[i] = heap[i].first;
        indices[i] = heap[i].second;
    }
}

}  // namespace meshless
