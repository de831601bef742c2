#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "biclink/context.hpp"

namespace biclink {

enum class Heuristic { common_neighbors, jaccard, adamic_adar, resource_allocation };

/// Parses "cn", "jc", "aa" or "ra".
Heuristic parse_heuristic(std::string_view name);
std::string_view to_string(Heuristic h);

/// Similarity of objects u and w through their attribute neighborhoods.
double object_similarity(const FormalContext& ctx, std::uint32_t u, std::uint32_t w, Heuristic kind);

/// Sum of object_similarity(u, w) over the objects w != u adjacent to attribute v.
double score_heuristic(const FormalContext& ctx, std::uint32_t u, std::uint32_t v, Heuristic kind);

/// Rank-k truncated SVD reconstruction of the 0/1 incidence matrix.
class SvdScorer {
 public:
  SvdScorer(const FormalContext& ctx, std::size_t rank);
  double score(std::uint32_t u, std::uint32_t v) const;
  const Eigen::MatrixXd& reconstruction() const noexcept { return recon_; }
  std::size_t rank() const noexcept { return rank_; }

 private:
  Eigen::MatrixXd recon_;
  std::size_t rank_;
};

double score_mf_svd(const FormalContext& ctx, std::size_t rank, std::uint32_t u, std::uint32_t v);

Eigen::MatrixXd incidence_matrix(const FormalContext& ctx);

}  // namespace biclink
