#include "pcc/tcpnet.hpp"

#include <cmath>
#include <string>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kVecEps = 1e-8;

template <typename T>
using Mx = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vx = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using RepT = BasicRankFeatures<T>;

template <typename T>
RepT<T> cast_rep(const RankFeatures& f) {
  RepT<T> out;
  out.s = f.s.template cast<T>();
  for (int k = 0; k < 3; ++k) out.v[k] = f.v[k].template cast<T>();
  return out;
}

template <typename T>
Mx<T> silu(const Mx<T>& x) {
  return (x.array() / (T(1) + (-x.array()).exp())).matrix();
}

template <typename T>
Mx<T> sigmoid_m(const Mx<T>& x) {
  return (T(1) / (T(1) + (-x.array()).exp())).matrix();
}

template <typename T>
RepT<T> ln_t(const RepT<T>& h, const LnParams* affine) {
  RepT<T> out;
  const Vx<T> mean = h.s.rowwise().mean();
  Mx<T> centered = h.s.colwise() - mean;
  const Vx<T> var = centered.array().square().rowwise().mean();
  const Vx<T> inv = (var.array() + T(kLnEps)).sqrt().inverse();
  out.s = (centered.array().colwise() * inv.array()).matrix();
  if (affine != nullptr && affine->gain.size() > 0) {
    if (affine->gain.size() != h.s.cols()) {
      throw ShapeMismatch("layer-norm affine width " +
                          std::to_string(affine->gain.size()) +
                          " does not match " + std::to_string(h.s.cols()) +
                          " channels");
    }
    const Vx<T> g = affine->gain.cast<T>();
    const Vx<T> b = affine->bias.cast<T>();
    out.s = out.s * g.asDiagonal();
    out.s.rowwise() += b.transpose();
  }

  const int dv = h.vector_width();
  Vx<T> sq = Vx<T>::Zero(h.s.rows());
  for (int k = 0; k < 3; ++k) {
    sq += h.v[k].array().square().matrix().rowwise().sum();
  }
  const Vx<T> scale = ((sq.array() / T(dv)) + T(kVecEps)).sqrt().inverse();
  for (int k = 0; k < 3; ++k) {
    out.v[k] = (h.v[k].array().colwise() * scale.array()).matrix();
  }
  return out;
}

template <typename T>
RepT<T> tcp_t(const TcpParams& p, const RepT<T>& h,
              const std::vector<Mat3>& frames) {
  const TcpShape& sh = p.shape;
  const int64_t n = h.s.rows();
  if (h.s.cols() != sh.ds_in || h.v[0].cols() != sh.dv_in) {
    throw ShapeMismatch(
        "perceptron expects widths (" + std::to_string(sh.ds_in) + "," +
        std::to_string(sh.dv_in) + "), got (" + std::to_string(h.s.cols()) +
        "," + std::to_string(h.v[0].cols()) + ")");
  }
  if (static_cast<int64_t>(frames.size()) != n) {
    throw ShapeMismatch("need one frame per row: " +
                        std::to_string(frames.size()) + " frames for " +
                        std::to_string(n) + " rows");
  }
  RepT<T> out;
  if (n == 0) {
    out.s.resize(0, sh.ds_out);
    for (int k = 0; k < 3; ++k) out.v[k].resize(0, sh.dv_out);
    return out;
  }

  const Mx<T> v_reduce = p.v_reduce.cast<T>();
  const Mx<T> v_down = p.v_down.cast<T>();
  const Mx<T> s_w = p.s_w.cast<T>();
  const Vx<T> s_b = p.s_b.cast<T>();
  const Mx<T> v_up = p.v_up.cast<T>();
  const Mx<T> gate_w = p.gate_w.cast<T>();
  const Vx<T> gate_b = p.gate_b.cast<T>();

  std::array<Mx<T>, 3> s3, z;
  for (int k = 0; k < 3; ++k) {
    s3[k] = h.v[k] * v_reduce.transpose();
    z[k] = h.v[k] * v_down.transpose();
  }

  Mx<T> hin(n, sh.hidden_in());
  hin.middleCols(0, sh.ds_in) = h.s;
  for (int64_t i = 0; i < n; ++i) {
    const Mat3& f = frames[i];
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        hin(i, sh.ds_in + 3 * c + k) = T(f(k, 0)) * s3[0](i, c) +
                                       T(f(k, 1)) * s3[1](i, c) +
                                       T(f(k, 2)) * s3[2](i, c);
      }
    }
  }
  hin.middleCols(sh.ds_in + 9, sh.bottleneck()) =
      (z[0].array().square() + z[1].array().square() + z[2].array().square())
          .sqrt()
          .matrix();

  Mx<T> pre = hin * s_w.transpose();
  pre.rowwise() += s_b.transpose();
  out.s = silu(pre);

  Mx<T> glin = out.s * gate_w.transpose();
  glin.rowwise() += gate_b.transpose();
  const Mx<T> gate = sigmoid_m(glin);
  for (int k = 0; k < 3; ++k) {
    out.v[k] = (z[k] * v_up.transpose()).cwiseProduct(gate);
  }
  return out;
}

template <typename T>
Mx<T> mean_rows_t(const SparseInt& m, const Mx<T>& src) {
  if (m.cols() != src.rows()) {
    throw ShapeMismatch("aggregation over " + std::to_string(m.cols()) +
                        " columns applied to " + std::to_string(src.rows()) +
                        " rows");
  }
  Mx<T> out = Mx<T>::Zero(m.rows(), src.cols());
  const auto& tr = m.triplets();
  const auto& rp = m.row_ptr();
  for (int64_t r = 0; r < m.rows(); ++r) {
    const int64_t begin = rp[r], end = rp[r + 1];
    if (begin == end) continue;
    for (int64_t k = begin; k < end; ++k) out.row(r) += src.row(tr[k].col);
    out.row(r) /= T(end - begin);
  }
  return out;
}

template <typename T>
Mx<T> mean_all_t(const Mx<T>& src) {
  Mx<T> out = Mx<T>::Zero(1, src.cols());
  for (int64_t i = 0; i < src.rows(); ++i) out.row(0) += src.row(i);
  if (src.rows() > 0) out.row(0) /= T(src.rows());
  return out;
}

template <typename T>
Mx<T> gather_t(const std::vector<int32_t>& index, const Mx<T>& src,
               int64_t width) {
  if (src.rows() > 0 && src.cols() != width) {
    throw ShapeMismatch("gather width " + std::to_string(width) +
                        " does not match source width " +
                        std::to_string(src.cols()));
  }
  Mx<T> out = Mx<T>::Zero(static_cast<int64_t>(index.size()), width);
  for (size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    if (index[i] >= src.rows()) {
      throw ShapeMismatch("gather index " + std::to_string(index[i]) +
                          " outside " + std::to_string(src.rows()) + " rows");
    }
    out.row(i) = src.row(index[i]);
  }
  return out;
}

template <typename T>
RepT<T> mean_rows_rep(const SparseInt& m, const RepT<T>& src) {
  RepT<T> out;
  out.s = mean_rows_t<T>(m, src.s);
  for (int k = 0; k < 3; ++k) out.v[k] = mean_rows_t<T>(m, src.v[k]);
  return out;
}

template <typename T>
RepT<T> mean_all_rep(const RepT<T>& src) {
  RepT<T> out;
  out.s = mean_all_t<T>(src.s);
  for (int k = 0; k < 3; ++k) out.v[k] = mean_all_t<T>(src.v[k]);
  return out;
}

template <typename T>
RepT<T> gather_rep(const std::vector<int32_t>& index, const RepT<T>& src,
                   int64_t s_width, int64_t v_width) {
  RepT<T> out;
  out.s = gather_t<T>(index, src.s, s_width);
  for (int k = 0; k < 3; ++k) out.v[k] = gather_t<T>(index, src.v[k], v_width);
  return out;
}

template <typename T>
RepT<T> hconcat(std::initializer_list<const RepT<T>*> parts) {
  const int64_t rows = (*parts.begin())->s.rows();
  int64_t sc = 0, vc = 0;
  for (const RepT<T>* p : parts) {
    sc += p->s.cols();
    vc += p->v[0].cols();
  }
  RepT<T> out;
  out.s.resize(rows, sc);
  for (int k = 0; k < 3; ++k) out.v[k].resize(rows, vc);
  int64_t so = 0, vo = 0;
  for (const RepT<T>* p : parts) {
    out.s.middleCols(so, p->s.cols()) = p->s;
    so += p->s.cols();
    for (int k = 0; k < 3; ++k) {
      out.v[k].middleCols(vo, p->v[0].cols()) = p->v[k];
    }
    vo += p->v[0].cols();
  }
  return out;
}

template <typename T>
RepT<T> add_rep(const RepT<T>& a, const RepT<T>& b) {
  RepT<T> out;
  out.s = a.s + b.s;
  for (int k = 0; k < 3; ++k) out.v[k] = a.v[k] + b.v[k];
  return out;
}

template <typename T>
RepT<T> edge_message_t(const LayerParams& layer,
                       const std::array<RepT<T>, 4>& emb, const ProteinCC& cc,
                       const std::vector<Mat3>& edge_frames) {
  const auto& edges = cc.edges();
  const auto& cell_of = cc.cell_of();
  const int64_t ne = static_cast<int64_t>(edges.size());
  const RepT<T>& h0 = emb[0];
  const RepT<T>& h1 = emb[1];
  const RepT<T>& h2 = emb[2];
  const int64_t ds0 = h0.s.cols(), ds1 = h1.s.cols(), ds2 = h2.s.cols();
  const int64_t dv0 = h0.v[0].cols(), dv1 = h1.v[0].cols(),
                dv2 = h2.v[0].cols();

  RepT<T> in;
  in.s = Mx<T>::Zero(ne, 2 * ds0 + ds1 + 2 * ds2);
  for (int k = 0; k < 3; ++k) {
    in.v[k] = Mx<T>::Zero(ne, 2 * dv0 + dv1 + 2 * dv2);
  }
  for (int64_t e = 0; e < ne; ++e) {
    const int32_t src = edges[e].src, tgt = edges[e].tgt;
    const int32_t cs = cell_of[src], ct = cell_of[tgt];
    in.s.row(e).segment(0, ds0) = h0.s.row(src);
    in.s.row(e).segment(ds0, ds0) = h0.s.row(tgt);
    in.s.row(e).segment(2 * ds0, ds1) = h1.s.row(e);
    if (cs >= 0) in.s.row(e).segment(2 * ds0 + ds1, ds2) = h2.s.row(cs);
    if (ct >= 0) in.s.row(e).segment(2 * ds0 + ds1 + ds2, ds2) = h2.s.row(ct);
    for (int k = 0; k < 3; ++k) {
      in.v[k].row(e).segment(0, dv0) = h0.v[k].row(src);
      in.v[k].row(e).segment(dv0, dv0) = h0.v[k].row(tgt);
      in.v[k].row(e).segment(2 * dv0, dv1) = h1.v[k].row(e);
      if (cs >= 0) {
        in.v[k].row(e).segment(2 * dv0 + dv1, dv2) = h2.v[k].row(cs);
      }
      if (ct >= 0) {
        in.v[k].row(e).segment(2 * dv0 + dv1 + dv2, dv2) = h2.v[k].row(ct);
      }
    }
  }

  RepT<T> h = tcp_t<T>(layer.msg_proj, in, edge_frames);
  for (const TcpParams& res : layer.msg_res) {
    h = add_rep<T>(tcp_t<T>(res, h, edge_frames), h);
  }

  const Vx<T> attn = layer.attn.cast<T>();
  Vx<T> logits = h.s * attn;
  const Vx<T> gate =
      (T(1) / (T(1) + (-logits.array()).exp())).matrix();
  h.s = (h.s.array().colwise() * gate.array()).matrix();
  return h;
}

template <typename T>
RepT<T> sse_update_t(const LayerParams& layer,
                     const std::array<RepT<T>, 4>& emb, const RepT<T>& messages,
                     const ProteinCC& cc, const std::vector<Mat3>& cell_frames) {
  const RepT<T> nodes = mean_rows_rep<T>(cc.incidence(2, 0), emb[0]);
  const RepT<T> inner = mean_rows_rep<T>(cc.incidence(2, 1), emb[1]);
  const RepT<T> outer = mean_rows_rep<T>(cc.intersection(), messages);
  const RepT<T> in = hconcat<T>({&emb[2], &nodes, &inner, &outer});
  return tcp_t<T>(layer.sse_tcp, in, cell_frames);
}

template <typename T>
RepT<T> node_update_t(const LayerParams& layer,
                      const std::array<RepT<T>, 4>& emb, const RepT<T>& messages,
                      const RepT<T>& u2, const ProteinCC& cc,
                      const std::vector<Mat3>& node_frames) {
  const RepT<T> parent = gather_rep<T>(cc.cell_of(), u2, emb[2].s.cols(),
                                       emb[2].v[0].cols());
  const SparseInt in_edges = cc.incidence(1, 0).transpose();
  const RepT<T> incoming = mean_rows_rep<T>(in_edges, messages);
  const RepT<T> in = hconcat<T>({&emb[0], &parent, &incoming});
  return tcp_t<T>(layer.node_tcp, in, node_frames);
}

template <typename T>
RepT<T> protein_update_t(const LayerParams& layer,
                         const std::array<RepT<T>, 4>& emb, const RepT<T>& u0,
                         const RepT<T>& u2, const ProteinCC& cc,
                         const std::vector<Mat3>& protein_frames) {
  const RepT<T> u0_mean = mean_all_rep<T>(u0);
  const RepT<T> parent = gather_rep<T>(cc.cell_of(), u2, emb[2].s.cols(),
                                       emb[2].v[0].cols());
  const RepT<T> u2_mean = mean_all_rep<T>(parent);
  const RepT<T> in = hconcat<T>({&u0_mean, &u2_mean, &emb[3]});
  return tcp_t<T>(layer.protein_tcp, in, protein_frames);
}

template <typename T>
std::array<RepT<T>, 4> forward_t(const ModelParams& model, const ProteinCC& cc,
                                 const FeatureSet& features,
                                 const ScalarizerSet& scal) {
  for (int r = 0; r < 4; ++r) {
    if (features.rank[r].s.cols() != model.embed[r].shape.ds_in ||
        features.rank[r].v[0].cols() != model.embed[r].shape.dv_in) {
      throw ShapeMismatch(
          "rank " + std::to_string(r) + " features are (" +
          std::to_string(features.rank[r].s.cols()) + "," +
          std::to_string(features.rank[r].v[0].cols()) +
          ") wide but the model embeds (" +
          std::to_string(model.embed[r].shape.ds_in) + "," +
          std::to_string(model.embed[r].shape.dv_in) + ")");
    }
  }
  const bool pc = model.config.protein_channel;
  const std::vector<Mat3> protein_frames{scal.protein};
  const std::array<const std::vector<Mat3>*, 4> frames{
      &scal.node, &scal.edge, &scal.cell, &protein_frames};

  std::array<RepT<T>, 4> h;
  for (int r = 0; r < 4; ++r) {
    if (r == 3 && !pc) {
      h[3].s.resize(0, model.config.ds[3]);
      for (int k = 0; k < 3; ++k) h[3].v[k].resize(0, model.config.dv[3]);
      continue;
    }
    const RepT<T> raw = cast_rep<T>(features.rank[r]);
    h[r] = tcp_t<T>(model.embed[r], ln_t<T>(raw, nullptr), *frames[r]);
  }

  for (const LayerParams& layer : model.layers) {
    const RepT<T> msg = edge_message_t<T>(layer, h, cc, scal.edge);
    const RepT<T> u2 = sse_update_t<T>(layer, h, msg, cc, scal.cell);
    const RepT<T> u0 = node_update_t<T>(layer, h, msg, u2, cc, scal.node);
    if (pc) {
      const RepT<T> u3 =
          protein_update_t<T>(layer, h, u0, u2, cc, protein_frames);
      h[3] = ln_t<T>(add_rep<T>(u3, h[3]), &layer.ln[3]);
    }
    h[0] = ln_t<T>(add_rep<T>(u0, h[0]), &layer.ln[0]);
    h[2] = ln_t<T>(add_rep<T>(u2, h[2]), &layer.ln[2]);
  }
  return h;
}

template <typename T>
Vx<T> readout_t(const std::array<RepT<T>, 4>& emb, ReadoutMode mode) {
  switch (mode) {
    case ReadoutMode::MeanPool:
      return mean_all_t<T>(emb[0].s).row(0).transpose();
    case ReadoutMode::SumPool: {
      Vx<T> acc = Vx<T>::Zero(emb[0].s.cols());
      for (int64_t i = 0; i < emb[0].s.rows(); ++i) {
        acc += emb[0].s.row(i).transpose();
      }
      return acc;
    }
    case ReadoutMode::ProteinChannel:
      if (emb[3].s.rows() == 0) {
        throw MissingProteinChannel(
            "protein readout requested but the protein channel is disabled");
      }
      return emb[3].s.row(0).transpose();
  }
  throw BadConfig("unknown readout mode");
}

void draw_matrix(Rng& rng, Eigen::MatrixXd& m, int64_t rows, int64_t cols) {
  m.resize(rows, cols);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(-a, a);
  }
}

TcpParams init_tcp(Rng& rng, const TcpShape& sh) {
  if (sh.ds_in < 1 || sh.dv_in < 1 || sh.ds_out < 1 || sh.dv_out < 1 ||
      sh.lambda < 1) {
    throw BadConfig("perceptron dimensions must be positive");
  }
  if (sh.dv_in % sh.lambda != 0) {
    throw BadConfig("vector width " + std::to_string(sh.dv_in) +
                    " is not divisible by bottleneck " +
                    std::to_string(sh.lambda));
  }
  TcpParams p;
  p.shape = sh;
  draw_matrix(rng, p.v_reduce, 3, sh.dv_in);
  draw_matrix(rng, p.v_down, sh.bottleneck(), sh.dv_in);
  draw_matrix(rng, p.s_w, sh.ds_out, sh.hidden_in());
  p.s_b = Eigen::VectorXd::Zero(sh.ds_out);
  draw_matrix(rng, p.v_up, sh.dv_out, sh.bottleneck());
  draw_matrix(rng, p.gate_w, sh.dv_out, sh.ds_out);
  p.gate_b = Eigen::VectorXd::Zero(sh.dv_out);
  return p;
}

}  // namespace

TcpParams random_tcp(Rng& rng, const TcpShape& shape) {
  return init_tcp(rng, shape);
}

ModelParams init_params(const ModelConfig& c) {
  if (c.layers < 1) throw BadConfig("need at least one interaction layer");
  if (c.msg_depth < 0) throw BadConfig("message depth cannot be negative");
  for (int r = 0; r < 4; ++r) {
    if (c.ds[r] < 1 || c.dv[r] < 1) {
      throw BadConfig("rank " + std::to_string(r) + " widths must be positive");
    }
  }
  Rng rng(c.seed);
  ModelParams p;
  p.config = c;
  for (int r = 0; r < 4; ++r) {
    p.embed[r] = init_tcp(rng, {kFeatureScalarWidths[r],
                                kFeatureVectorWidths[r], c.ds[r], c.dv[r],
                                c.lambda_embed});
  }
  const int ds0 = c.ds[0], ds1 = c.ds[1], ds2 = c.ds[2], ds3 = c.ds[3];
  const int dv0 = c.dv[0], dv1 = c.dv[1], dv2 = c.dv[2], dv3 = c.dv[3];
  p.layers.resize(c.layers);
  for (int l = 0; l < c.layers; ++l) {
    LayerParams& lp = p.layers[l];
    lp.msg_proj = init_tcp(rng, {2 * ds0 + ds1 + 2 * ds2,
                                 2 * dv0 + dv1 + 2 * dv2, ds0, dv0,
                                 c.lambda_hidden});
    for (int d = 0; d < c.msg_depth; ++d) {
      lp.msg_res.push_back(init_tcp(rng, {ds0, dv0, ds0, dv0,
                                          c.lambda_hidden}));
    }
    lp.attn = Eigen::VectorXd::Zero(ds0);
    lp.sse_tcp = init_tcp(rng, {ds2 + ds0 + ds1 + ds0, dv2 + dv0 + dv1 + dv0,
                                ds2, dv2, c.lambda_hidden});
    lp.node_tcp = init_tcp(rng, {ds0 + ds2 + ds0, dv0 + dv2 + dv0, ds0, dv0,
                                 c.lambda_hidden});
    lp.protein_tcp = init_tcp(rng, {ds0 + ds2 + ds3, dv0 + dv2 + dv3, ds3,
                                    dv3, c.lambda_hidden});
    for (int r : {0, 2, 3}) {
      lp.ln[r].gain = Eigen::VectorXd::Ones(c.ds[r]);
      lp.ln[r].bias = Eigen::VectorXd::Zero(c.ds[r]);
    }
  }
  return p;
}

Rep gvp_layer_norm(const Rep& h, const LnParams* affine) {
  return ln_t<double>(h, affine);
}

Rep tcp_forward(const TcpParams& p, const Rep& h,
                const std::vector<Mat3>& frames) {
  return tcp_t<double>(p, h, frames);
}

std::array<Rep, 4> embed(const ModelParams& model, const FeatureSet& features,
                         const ScalarizerSet& scal) {
  std::array<Rep, 4> h;
  const std::vector<Mat3> protein_frames{scal.protein};
  const std::array<const std::vector<Mat3>*, 4> frames{
      &scal.node, &scal.edge, &scal.cell, &protein_frames};
  for (int r = 0; r < 4; ++r) {
    h[r] = tcp_forward(model.embed[r],
                       gvp_layer_norm(features.rank[r], nullptr), *frames[r]);
  }
  return h;
}

Rep edge_message(const LayerParams& layer, const std::array<Rep, 4>& emb,
                 const ProteinCC& cc, const ScalarizerSet& scal) {
  return edge_message_t<double>(layer, emb, cc, scal.edge);
}

Rep sse_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
               const Rep& messages, const ProteinCC& cc,
               const ScalarizerSet& scal) {
  return sse_update_t<double>(layer, emb, messages, cc, scal.cell);
}

Rep node_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
                const Rep& messages, const Rep& u2, const ProteinCC& cc,
                const ScalarizerSet& scal) {
  return node_update_t<double>(layer, emb, messages, u2, cc, scal.node);
}

Rep protein_update(const LayerParams& layer, const std::array<Rep, 4>& emb,
                   const Rep& u0, const Rep& u2, const ProteinCC& cc,
                   const ScalarizerSet& scal) {
  const std::vector<Mat3> protein_frames{scal.protein};
  return protein_update_t<double>(layer, emb, u0, u2, cc, protein_frames);
}

std::array<Rep, 4> forward(const ModelParams& model, const ProteinCC& cc,
                           const FeatureSet& features,
                           const ScalarizerSet& scal) {
  return forward_t<double>(model, cc, features, scal);
}

std::array<RepF, 4> forward_f32(const ModelParams& model, const ProteinCC& cc,
                                const FeatureSet& features,
                                const ScalarizerSet& scal) {
  return forward_t<float>(model, cc, features, scal);
}

Eigen::VectorXd readout(const std::array<Rep, 4>& emb, ReadoutMode mode) {
  return readout_t<double>(emb, mode);
}

Eigen::VectorXf readout_f32(const std::array<RepF, 4>& emb, ReadoutMode mode) {
  return readout_t<float>(emb, mode);
}

Eigen::MatrixXd mean_rows(const SparseInt& m, const Eigen::MatrixXd& src) {
  return mean_rows_t<double>(m, src);
}

Eigen::MatrixXd mean_all_rows(const Eigen::MatrixXd& src) {
  return mean_all_t<double>(src);
}

Eigen::MatrixXd gather_rows(const std::vector<int32_t>& index,
                            const Eigen::MatrixXd& src, int64_t width) {
  return gather_t<double>(index, src, width);
}

}  // namespace pcc
