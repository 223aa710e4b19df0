#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pcc/complex.hpp"
#include "pcc/features.hpp"
#include "pcc/frames.hpp"
#include "pcc/geometry.hpp"

namespace pcc {

using Rep = RankFeatures;
using RepF = BasicRankFeatures<float>;

struct TcpShape {
  int ds_in, dv_in, ds_out, dv_out, lambda;
  int bottleneck() const { return dv_in / lambda; }
  int hidden_in() const { return ds_in + 9 + bottleneck(); }
};

// Dual-pathway perceptron: vector channels are reduced, scalarized against a
// per-row frame, mixed into the scalar pathway, and gated back out.
struct TcpParams {
  TcpShape shape;
  Eigen::MatrixXd v_reduce;  // 3 x dv_in
  Eigen::MatrixXd v_down;    // bottleneck x dv_in
  Eigen::MatrixXd s_w;       // ds_out x hidden_in
  Eigen::VectorXd s_b;       // ds_out
  Eigen::MatrixXd v_up;      // dv_out x bottleneck
  Eigen::MatrixXd gate_w;    // dv_out x ds_out
  Eigen::VectorXd gate_b;    // dv_out
};

struct LnParams {
  Eigen::VectorXd gain, bias;
};

struct LayerParams {
  TcpParams msg_proj;
  std::vector<TcpParams> msg_res;
  Eigen::VectorXd attn;  // scalar attention over message channels
  TcpParams sse_tcp, node_tcp, protein_tcp;
  std::array<LnParams, 4> ln;  // ranks 0, 2, 3 used
};

struct ModelConfig {
  std::array<int, 4> ds{128, 32, 128, 128};
  std::array<int, 4> dv{16, 4, 16, 16};
  int layers = 6;
  int msg_depth = 2;
  int lambda_embed = 1;
  int lambda_hidden = 4;
  bool protein_channel = true;
  uint64_t seed = 0;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct ModelParams {
  ModelConfig config;
  std::array<TcpParams, 4> embed;
  std::vector<LayerParams> layers;
};

ModelParams init_params(const ModelConfig& config);
TcpParams random_tcp(Rng& rng, const TcpShape& shape);

enum class ReadoutMode { MeanPool, SumPool, ProteinChannel };

// Building blocks, 64-bit reference path. frames holds one 3x3 per row.
Rep gvp_layer_norm(const Rep& h, const LnParams* affine);
Rep tcp_forward(const TcpParams& p, const Rep& h,
                const std::vector<Mat3>& frames);

std::array<Rep, 4> embed(const ModelParams& model, const FeatureSet& features,
                         const ScalarizerSet& scal);
Rep edge_message(const LayerParams& layer, const std::array<Rep, 4>& emb,
                 const ProteinCC& cc, const ScalarizerSet& scal);
Rep sse_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
               const Rep& messages, const ProteinCC& cc,
               const ScalarizerSet& scal);
Rep node_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
                const Rep& messages, const Rep& u2, const ProteinCC& cc,
                const ScalarizerSet& scal);
Rep protein_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
                   const Rep& u0, const Rep& u2, const ProteinCC& cc,
                   const ScalarizerSet& scal);

std::array<Rep, 4> forward(const ModelParams& model, const ProteinCC& cc,
                           const FeatureSet& features,
                           const ScalarizerSet& scal);
std::array<RepF, 4> forward_f32(const ModelParams& model, const ProteinCC& cc,
                                const FeatureSet& features,
                                const ScalarizerSet& scal);

Eigen::VectorXd readout(const std::array<Rep, 4>& emb, ReadoutMode mode);
Eigen::VectorXf readout_f32(const std::array<RepF, 4>& emb, ReadoutMode mode);

// Aggregation primitives shared by the update steps; means accumulate in
// ascending index order so independent loops can match them bit for bit.
Eigen::MatrixXd mean_rows(const SparseInt& m, const Eigen::MatrixXd& src);
Eigen::MatrixXd mean_all_rows(const Eigen::MatrixXd& src);
Eigen::MatrixXd gather_rows(const std::vector<int32_t>& index,
                            const Eigen::MatrixXd& src, int64_t width);

}  // namespace pcc
