#include "pcc/serialize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "pcc/errors.hpp"

namespace pcc {

namespace {

constexpr uint32_t kParamsVersion = 1;
constexpr uint32_t kBundleVersion = 1;
constexpr char kParamsMagic[4] = {'T', 'C', 'P', 'N'};
constexpr char kBundleMagic[4] = {'P', 'C', 'C', '1'};

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_i64(std::vector<uint8_t>& out, int64_t v) {
  const uint64_t u = static_cast<uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back((u >> (8 * i)) & 0xff);
}

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back((u >> (8 * i)) & 0xff);
}

struct Reader {
  const std::vector<uint8_t>& data;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > data.size()) {
      throw CorruptBlob("unexpected end of blob at byte " +
                        std::to_string(pos));
    }
  }
  const uint8_t* take(size_t n) {
    need(n);
    const uint8_t* p = data.data() + pos;
    pos += n;
    return p;
  }
  uint32_t u32() {
    const uint8_t* p = take(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return v;
  }
  int64_t i64() {
    const uint8_t* p = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return static_cast<int64_t>(v);
  }
  double f64() {
    const uint8_t* p = take(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
  }
  std::string text(size_t n) {
    const uint8_t* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  void done() const {
    if (pos != data.size()) {
      throw CorruptBlob(std::to_string(data.size() - pos) +
                        " trailing bytes after payload");
    }
  }
};

std::map<std::string, std::string> parse_header(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw CorruptBlob("header line without '=': " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::string header_get(const std::map<std::string, std::string>& kv,
                       const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw CorruptBlob("header is missing key '" + key + "'");
  return it->second;
}

int64_t header_int(const std::map<std::string, std::string>& kv,
                   const std::string& key) {
  const std::string v = header_get(kv, key);
  try {
    size_t used = 0;
    const int64_t n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw CorruptBlob("header value for '" + key + "' is not a number: " + v);
  }
}

std::array<int, 4> header_int4(const std::map<std::string, std::string>& kv,
                               const std::string& key) {
  const std::string v = header_get(kv, key);
  std::array<int, 4> out{};
  std::istringstream in(v);
  std::string tok;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(in, tok, ',')) {
      throw CorruptBlob("header value for '" + key + "' needs 4 numbers: " + v);
    }
    out[i] = static_cast<int>(std::stoll(tok));
  }
  if (std::getline(in, tok, ',')) {
    throw CorruptBlob("header value for '" + key + "' has extra fields: " + v);
  }
  return out;
}

void put_matrix(std::vector<uint8_t>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void put_vector(std::vector<uint8_t>& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

void read_matrix(Reader& in, Eigen::MatrixXd& m, int64_t rows, int64_t cols) {
  m.resize(rows, cols);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t c = 0; c < cols; ++c) m(r, c) = in.f64();
  }
}

void read_vector(Reader& in, Eigen::VectorXd& v, int64_t n) {
  v.resize(n);
  for (int64_t i = 0; i < n; ++i) v[i] = in.f64();
}

void put_tcp(std::vector<uint8_t>& out, const TcpParams& p) {
  put_matrix(out, p.v_reduce);
  put_matrix(out, p.v_down);
  put_matrix(out, p.s_w);
  put_vector(out, p.s_b);
  put_matrix(out, p.v_up);
  put_matrix(out, p.gate_w);
  put_vector(out, p.gate_b);
}

void read_tcp(Reader& in, TcpParams& p) {
  const TcpShape& sh = p.shape;  // shapes prefilled from config
  read_matrix(in, p.v_reduce, 3, sh.dv_in);
  read_matrix(in, p.v_down, sh.bottleneck(), sh.dv_in);
  read_matrix(in, p.s_w, sh.ds_out, sh.hidden_in());
  read_vector(in, p.s_b, sh.ds_out);
  read_matrix(in, p.v_up, sh.dv_out, sh.bottleneck());
  read_matrix(in, p.gate_w, sh.dv_out, sh.ds_out);
  read_vector(in, p.gate_b, sh.dv_out);
}

void put_sparse(std::vector<uint8_t>& out, const SparseInt& m) {
  put_i64(out, m.rows());
  put_i64(out, m.cols());
  put_i64(out, m.nnz());
  for (const Triplet& t : m.triplets()) {
    put_i64(out, t.row);
    put_i64(out, t.col);
    put_i64(out, t.value);
  }
}

SparseInt read_sparse(Reader& in) {
  const int64_t rows = in.i64();
  const int64_t cols = in.i64();
  const int64_t nnz = in.i64();
  if (rows < 0 || cols < 0 || nnz < 0) {
    throw CorruptBlob("negative sparse-matrix dimension");
  }
  std::vector<Triplet> trip;
  trip.reserve(nnz);
  for (int64_t k = 0; k < nnz; ++k) {
    const int64_t r = in.i64();
    const int64_t c = in.i64();
    const int64_t v = in.i64();
    trip.push_back({r, c, v});
  }
  try {
    return SparseInt::from_triplets(rows, cols, std::move(trip));
  } catch (const ShapeMismatch& e) {
    throw CorruptBlob(std::string("bad sparse-matrix entry: ") + e.what());
  }
}

std::vector<uint8_t> frame_blob(const char magic[4], uint32_t version,
                                const std::string& header) {
  std::vector<uint8_t> out;
  out.insert(out.end(), magic, magic + 4);
  put_u32(out, version);
  put_u32(out, static_cast<uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  return out;
}

std::string open_blob(Reader& in, const char magic[4], uint32_t version,
                      const char* what) {
  const uint8_t* m = in.take(4);
  if (std::memcmp(m, magic, 4) != 0) {
    throw CorruptBlob(std::string("not a ") + what + " blob (bad magic)");
  }
  const uint32_t v = in.u32();
  if (v != version) {
    throw VersionMismatch(std::string(what) + " blob version " +
                          std::to_string(v) + ", expected " +
                          std::to_string(version));
  }
  const uint32_t hlen = in.u32();
  return in.text(hlen);
}

}  // namespace

std::vector<uint8_t> params_to_bytes(const ModelParams& p) {
  const ModelConfig& c = p.config;
  std::ostringstream h;
  h << "ds=" << c.ds[0] << ',' << c.ds[1] << ',' << c.ds[2] << ',' << c.ds[3]
    << '\n';
  h << "dv=" << c.dv[0] << ',' << c.dv[1] << ',' << c.dv[2] << ',' << c.dv[3]
    << '\n';
  h << "layers=" << c.layers << '\n';
  h << "msg_depth=" << c.msg_depth << '\n';
  h << "lambda_embed=" << c.lambda_embed << '\n';
  h << "lambda_hidden=" << c.lambda_hidden << '\n';
  h << "protein_channel=" << (c.protein_channel ? 1 : 0) << '\n';
  h << "seed=" << c.seed << '\n';

  std::vector<uint8_t> out =
      frame_blob(kParamsMagic, kParamsVersion, h.str());
  for (int r = 0; r < 4; ++r) put_tcp(out, p.embed[r]);
  for (const LayerParams& lp : p.layers) {
    put_tcp(out, lp.msg_proj);
    for (const TcpParams& res : lp.msg_res) put_tcp(out, res);
    put_vector(out, lp.attn);
    put_tcp(out, lp.sse_tcp);
    put_tcp(out, lp.node_tcp);
    put_tcp(out, lp.protein_tcp);
    for (int r : {0, 2, 3}) {
      put_vector(out, lp.ln[r].gain);
      put_vector(out, lp.ln[r].bias);
    }
  }
  return out;
}

ModelParams params_from_bytes(const std::vector<uint8_t>& bytes) {
  Reader in{bytes};
  const auto kv = parse_header(open_blob(in, kParamsMagic, kParamsVersion,
                                         "parameter"));
  ModelConfig c;
  c.ds = header_int4(kv, "ds");
  c.dv = header_int4(kv, "dv");
  c.layers = static_cast<int>(header_int(kv, "layers"));
  c.msg_depth = static_cast<int>(header_int(kv, "msg_depth"));
  c.lambda_embed = static_cast<int>(header_int(kv, "lambda_embed"));
  c.lambda_hidden = static_cast<int>(header_int(kv, "lambda_hidden"));
  c.protein_channel = header_int(kv, "protein_channel") != 0;
  c.seed = static_cast<uint64_t>(header_int(kv, "seed"));

  // Build the skeleton (shapes only) through the initializer, then overwrite
  // every array from the blob.
  ModelParams p;
  try {
    p = init_params(c);
  } catch (const BadConfig& e) {
    throw CorruptBlob(std::string("header describes an invalid model: ") +
                      e.what());
  }
  for (int r = 0; r < 4; ++r) read_tcp(in, p.embed[r]);
  for (LayerParams& lp : p.layers) {
    read_tcp(in, lp.msg_proj);
    for (TcpParams& res : lp.msg_res) read_tcp(in, res);
    read_vector(in, lp.attn, c.ds[0]);
    read_tcp(in, lp.sse_tcp);
    read_tcp(in, lp.node_tcp);
    read_tcp(in, lp.protein_tcp);
    for (int r : {0, 2, 3}) {
      read_vector(in, lp.ln[r].gain, c.ds[r]);
      read_vector(in, lp.ln[r].bias, c.ds[r]);
    }
  }
  in.done();
  return p;
}

void save_params(const std::string& path, const ModelParams& p) {
  write_file_atomic(path, params_to_bytes(p));
}

ModelParams load_params(const std::string& path) {
  return params_from_bytes(read_file_bytes(path));
}

Bundle bundle_from_pipeline(const Pipeline& pipe, const PipelineOptions& opt) {
  Bundle b;
  b.source_id = pipe.structure.source_id;
  b.knn = opt.knn;
  b.min_sse = opt.min_sse;
  b.sequence_withheld = !opt.with_sequence;
  b.sse_from_file = !opt.sse_override.empty();
  b.sse = pipe.sse;
  b.threedi = pipe.threedi;
  b.centered = pipe.centered;
  b.edges = pipe.cc.edges();
  b.cells = pipe.cc.cells();
  b.matrices = {pipe.cc.incidence(0, 1),    pipe.cc.incidence(1, 0),
                pipe.cc.incidence(2, 0),    pipe.cc.incidence(2, 1),
                pipe.cc.outer_leaving(),    pipe.cc.outer_entering_t(),
                pipe.cc.intersection()};
  b.features = pipe.features;
  return b;
}

std::vector<uint8_t> bundle_to_bytes(const Bundle& b) {
  const int64_t n = static_cast<int64_t>(b.centered.size());
  std::ostringstream h;
  h << "source=" << b.source_id << '\n';
  h << "residues=" << n << '\n';
  h << "edges=" << b.edges.size() << '\n';
  h << "cells=" << b.cells.size() << '\n';
  h << "knn=" << b.knn << '\n';
  h << "min_sse=" << b.min_sse << '\n';
  h << "sequence_withheld=" << (b.sequence_withheld ? 1 : 0) << '\n';
  h << "sse_source=" << (b.sse_from_file ? "file" : "assigned") << '\n';
  h << "threedi=" << (b.threedi.empty() ? 0 : 1) << '\n';
  h << "scalar_widths=" << kFeatureScalarWidths[0] << ','
    << kFeatureScalarWidths[1] << ',' << kFeatureScalarWidths[2] << ','
    << kFeatureScalarWidths[3] << '\n';
  h << "vector_widths=" << kFeatureVectorWidths[0] << ','
    << kFeatureVectorWidths[1] << ',' << kFeatureVectorWidths[2] << ','
    << kFeatureVectorWidths[3] << '\n';

  std::vector<uint8_t> out =
      frame_blob(kBundleMagic, kBundleVersion, h.str());
  for (const Vec3& p : b.centered) {
    put_f64(out, p[0]);
    put_f64(out, p[1]);
    put_f64(out, p[2]);
  }
  out.insert(out.end(), b.sse.begin(), b.sse.end());
  out.insert(out.end(), b.threedi.begin(), b.threedi.end());
  for (const SseCell& c : b.cells) {
    put_i64(out, c.start);
    put_i64(out, c.end);
    out.push_back(static_cast<uint8_t>(c.label));
  }
  for (const Edge& e : b.edges) {
    put_i64(out, e.src);
    put_i64(out, e.tgt);
  }
  for (const SparseInt& m : b.matrices) put_sparse(out, m);
  for (int r = 0; r < 4; ++r) {
    const RankFeatures& f = b.features.rank[r];
    put_i64(out, f.count());
    put_i64(out, f.scalar_width());
    put_i64(out, f.vector_width());
    put_matrix(out, f.s);
    for (int k = 0; k < 3; ++k) put_matrix(out, f.v[k]);
  }
  return out;
}

Bundle bundle_from_bytes(const std::vector<uint8_t>& bytes) {
  Reader in{bytes};
  const auto kv =
      parse_header(open_blob(in, kBundleMagic, kBundleVersion, "bundle"));
  Bundle b;
  b.source_id = header_get(kv, "source");
  const int64_t n = header_int(kv, "residues");
  const int64_t ne = header_int(kv, "edges");
  const int64_t nc = header_int(kv, "cells");
  b.knn = static_cast<int>(header_int(kv, "knn"));
  b.min_sse = static_cast<int>(header_int(kv, "min_sse"));
  b.sequence_withheld = header_int(kv, "sequence_withheld") != 0;
  b.sse_from_file = header_get(kv, "sse_source") == "file";
  const bool has_threedi = header_int(kv, "threedi") != 0;
  const std::array<int, 4> sw = header_int4(kv, "scalar_widths");
  const std::array<int, 4> vw = header_int4(kv, "vector_widths");
  for (int r = 0; r < 4; ++r) {
    if (sw[r] != kFeatureScalarWidths[r] || vw[r] != kFeatureVectorWidths[r]) {
      throw CorruptBlob("bundle feature widths do not match this build");
    }
  }
  if (n < 0 || ne < 0 || nc < 0) throw CorruptBlob("negative count in header");

  b.centered.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    b.centered[i][0] = in.f64();
    b.centered[i][1] = in.f64();
    b.centered[i][2] = in.f64();
  }
  b.sse = in.text(n);
  if (has_threedi) b.threedi = in.text(n);
  b.cells.resize(nc);
  for (int64_t c = 0; c < nc; ++c) {
    b.cells[c].start = static_cast<int32_t>(in.i64());
    b.cells[c].end = static_cast<int32_t>(in.i64());
    b.cells[c].label = static_cast<char>(*in.take(1));
  }
  b.edges.resize(ne);
  for (int64_t e = 0; e < ne; ++e) {
    b.edges[e].src = static_cast<int32_t>(in.i64());
    b.edges[e].tgt = static_cast<int32_t>(in.i64());
  }
  b.matrices.resize(kBundleMatrixNames.size());
  for (SparseInt& m : b.matrices) m = read_sparse(in);
  for (int r = 0; r < 4; ++r) {
    RankFeatures& f = b.features.rank[r];
    const int64_t count = in.i64();
    const int64_t scols = in.i64();
    const int64_t vcols = in.i64();
    if (scols != kFeatureScalarWidths[r] || vcols != kFeatureVectorWidths[r]) {
      throw CorruptBlob("rank " + std::to_string(r) +
                        " feature block widths disagree with the header");
    }
    const int64_t expect = r == 0 ? n : r == 1 ? ne : r == 2 ? nc : 1;
    if (count != expect) {
      throw CorruptBlob("rank " + std::to_string(r) + " feature block has " +
                        std::to_string(count) + " rows, expected " +
                        std::to_string(expect));
    }
    read_matrix(in, f.s, count, scols);
    for (int k = 0; k < 3; ++k) read_matrix(in, f.v[k], count, vcols);
  }
  in.done();
  return b;
}

void save_bundle(const std::string& path, const Bundle& b) {
  write_file_atomic(path, bundle_to_bytes(b));
}

Bundle load_bundle(const std::string& path) {
  return bundle_from_bytes(read_file_bytes(path));
}

ProteinCC rebuild_cc(const Bundle& b) {
  ProteinCC cc(static_cast<int32_t>(b.centered.size()), b.edges, b.cells);
  const std::array<const SparseInt*, 7> rebuilt{
      &cc.incidence(0, 1),    &cc.incidence(1, 0),    &cc.incidence(2, 0),
      &cc.incidence(2, 1),    &cc.outer_leaving(),    &cc.outer_entering_t(),
      &cc.intersection()};
  if (b.matrices.size() != rebuilt.size()) {
    throw CorruptBlob("bundle stores " + std::to_string(b.matrices.size()) +
                      " matrices, expected " + std::to_string(rebuilt.size()));
  }
  for (size_t i = 0; i < rebuilt.size(); ++i) {
    if (!(b.matrices[i] == *rebuilt[i])) {
      throw CorruptBlob(std::string("stored matrix '") +
                        kBundleMatrixNames[i] +
                        "' disagrees with the rebuilt complex");
    }
  }
  return cc;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileUnreadable("cannot open file: " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw FileUnreadable("cannot read file: " + path);
  return bytes;
}

void write_file_atomic(const std::string& path,
                       const std::vector<uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open file for writing: " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw Error("cannot move " + tmp + " into place at " + path);
  }
}

}  // namespace pcc
