#include "biclink/baselines.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace biclink {

Heuristic parse_heuristic(std::string_view name) {
  if (name == "cn") return Heuristic::common_neighbors;
  if (name == "jc") return Heuristic::jaccard;
  if (name == "aa") return Heuristic::adamic_adar;
  if (name == "ra") return Heuristic::resource_allocation;
  throw std::invalid_argument("unknown heuristic: " + std::string(name));
}

std::string_view to_string(Heuristic h) {
  switch (h) {
    case Heuristic::common_neighbors: return "cn";
    case Heuristic::jaccard: return "jc";
    case Heuristic::adamic_adar: return "aa";
    case Heuristic::resource_allocation: return "ra";
  }
  return "?";
}

namespace {

void check_object(const FormalContext& ctx, std::uint32_t u) {
  if (u >= ctx.num_objects()) throw std::out_of_range("unknown object index " + std::to_string(u));
}

}  // namespace

double object_similarity(const FormalContext& ctx, std::uint32_t u, std::uint32_t w, Heuristic kind) {
  check_object(ctx, u);
  check_object(ctx, w);
  Bitset common = ctx.row(u);
  common &= ctx.row(w);
  switch (kind) {
    case Heuristic::common_neighbors:
      return static_cast<double>(common.count());
    case Heuristic::jaccard: {
      Bitset both = ctx.row(u);
      both |= ctx.row(w);
      const auto uni = both.count();
      return uni == 0 ? 0.0 : static_cast<double>(common.count()) / static_cast<double>(uni);
    }
    case Heuristic::adamic_adar: {
      double s = 0.0;
      common.for_each([&](std::size_t m) {
        const auto deg = ctx.column(static_cast<std::uint32_t>(m)).count();
        if (deg > 1) s += 1.0 / std::log(static_cast<double>(deg));
      });
      return s;
    }
    case Heuristic::resource_allocation: {
      double s = 0.0;
      common.for_each([&](std::size_t m) {
        s += 1.0 / static_cast<double>(ctx.column(static_cast<std::uint32_t>(m)).count());
      });
      return s;
    }
  }
  return 0.0;
}

double score_heuristic(const FormalContext& ctx, std::uint32_t u, std::uint32_t v, Heuristic kind) {
  check_object(ctx, u);
  if (v >= ctx.num_attributes()) throw std::out_of_range("unknown attribute index " + std::to_string(v));
  double s = 0.0;
  ctx.column(v).for_each([&](std::size_t w) {
    if (w != u) s += object_similarity(ctx, u, static_cast<std::uint32_t>(w), kind);
  });
  return s;
}

Eigen::MatrixXd incidence_matrix(const FormalContext& ctx) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ctx.num_objects()),
                                            static_cast<Eigen::Index>(ctx.num_attributes()));
  for (const auto& e : ctx.incidence()) a(e.object, e.attribute) = 1.0;
  return a;
}

SvdScorer::SvdScorer(const FormalContext& ctx, std::size_t rank) : rank_(rank) {
  const std::size_t full = std::min(ctx.num_objects(), ctx.num_attributes());
  if (rank < 1 || rank > full)
    throw std::invalid_argument("SVD rank " + std::to_string(rank) + " outside [1, " +
                                std::to_string(full) + "]");
  const Eigen::MatrixXd a = incidence_matrix(ctx);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto k = static_cast<Eigen::Index>(rank);
  recon_ = svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
           svd.matrixV().leftCols(k).transpose();
}

double SvdScorer::score(std::uint32_t u, std::uint32_t v) const {
  if (u >= recon_.rows()) throw std::out_of_range("unknown object index " + std::to_string(u));
  if (v >= recon_.cols()) throw std::out_of_range("unknown attribute index " + std::to_string(v));
  return recon_(u, v);
}

double score_mf_svd(const FormalContext& ctx, std::size_t rank, std::uint32_t u, std::uint32_t v) {
  return SvdScorer(ctx, rank).score(u, v);
}

}  // namespace biclink
