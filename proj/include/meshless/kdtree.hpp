#pragma once

#include <Eigen/Dense>
#include <vector>

namespace meshless {

// k-d tree over points stored as rows of an N x d matrix, d in {1, 2}.
// Queries return the exact k nearest neighbors ordered by (distance, index),
// so ties at equal distance resolve to the lower index. This ordering is what
// makes stencil construction reproducible.
class KdTree {
  public:
    explicit KdTree(const Eigen::MatrixXd& points);

    // Indices (and squared distances) of the k nearest points to `query`,
    // sorted ascending by squared distance with index tie-breaking.
    void query(const double* query, int k, std::vector<int>& indices,
               std::vector<double>& dist2) const;

    long size() const { return pts_.rows(); }
    int dim() const { return static_cast<int>(pts_.cols()); }

  private:
    struct Node {
        double split = 0.0;
        int axis = -1;       // -1 marks a leaf
        int left = -1, right = -1;
        int begin = 0, end = 0;  // index range for leaves
    };

    int build(int begin, int end);
    void search(int node, const double* q, int k, std::vector<std::pair<double, int>>& heap) const;

    Eigen::MatrixXd pts_;       // copy of the input, row-major access pattern
    std::vector<int> order_;    // permutation into pts_ rows
    std::vector<Node> nodes_;
    int root_ = -1;
    static constexpr int kLeafSize = 16;
};

}  // namespace meshless
