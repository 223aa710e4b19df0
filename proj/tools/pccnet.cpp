#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pcc/checks.hpp"
#include "pcc/errors.hpp"
#include "pcc/features.hpp"
#include "pcc/fixtures.hpp"
#include "pcc/pdb.hpp"
#include "pcc/serialize.hpp"
#include "pcc/tcpnet.hpp"

namespace fs = std::filesystem;

namespace {

struct FeaturizeArgs {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  int knn = 16;
  int min_sse = 3;
  bool no_sequence = false;
  std::string sse_from;
  std::string threedi_from;
};

struct ForwardArgs {
  std::string bundle;
  std::string params;
  std::string out_base;
  std::string readout = "mean";
  uint64_t seed = 0;
  bool f32 = false;
};

struct CheckArgs {
  std::string suite = "all";
  uint64_t seed = 0;
  int trials = 0;
};

struct BenchArgs {
  std::vector<int> sizes{64, 256};
  uint64_t seed = 0;
};

struct InspectArgs {
  std::string bundle;
};

std::string file_text(const std::string& path) {
  const std::vector<uint8_t> raw = pcc::read_file_bytes(path);
  return std::string(raw.begin(), raw.end());
}

template <typename T>
void append_raw(std::vector<uint8_t>& out, const T* data, size_t count) {
  const auto* p = reinterpret_cast<const uint8_t*>(data);
  out.insert(out.end(), p, p + count * sizeof(T));
}

void append_u32(std::vector<uint8_t>& out, uint32_t v) {
  append_raw(out, &v, 1);
}

template <typename T>
const char* real_format() {
  return sizeof(T) == 8 ? "%.17g" : "%.9g";
}

template <typename T>
void print_real(std::ostream& os, T v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), real_format<T>(), static_cast<double>(v));
  os << buf;
}

template <typename Derived>
void print_row(std::ostream& os, const Derived& row) {
  for (Eigen::Index c = 0; c < row.size(); ++c) {
    if (c > 0) os << ' ';
    print_real(os, row(c));
  }
  os << '\n';
}

template <typename T>
void write_embedding_files(const std::string& txt_path,
                           const std::string& bin_path,
                           const std::array<pcc::BasicRankFeatures<T>, 4>& emb,
                           const Eigen::Matrix<T, Eigen::Dynamic, 1>& ro,
                           const std::string& mode) {
  const char* dtype = sizeof(T) == 8 ? "f64" : "f32";

  std::ostringstream os;
  os << "pccnet-embeddings v1\n";
  os << "dtype " << dtype << "\n";
  os << "readout " << mode << " " << ro.size() << "\n";
  print_row(os, ro);
  for (int r = 0; r < 4; ++r) {
    os << "rank " << r << " rows " << emb[r].count() << " scalar-width "
       << emb[r].scalar_width() << " vector-width " << emb[r].vector_width()
       << "\n";
    for (Eigen::Index i = 0; i < emb[r].count(); ++i) {
      print_row(os, emb[r].s.row(i));
    }
    // vector rows hold x y z per channel
    for (Eigen::Index i = 0; i < emb[r].count(); ++i) {
      for (int c = 0; c < emb[r].vector_width(); ++c) {
        for (int k = 0; k < 3; ++k) {
          if (c > 0 || k > 0) os << ' ';
          print_real(os, emb[r].v[k](i, c));
        }
      }
      os << '\n';
    }
  }
  const std::string text = os.str();
  pcc::write_file_atomic(txt_path,
                         std::vector<uint8_t>(text.begin(), text.end()));

  std::ostringstream hs;
  hs << "dtype=" << dtype << "\nreadout=" << mode
     << "\nreadout_width=" << ro.size() << "\n";
  for (int r = 0; r < 4; ++r) {
    hs << "rank" << r << "=" << emb[r].count() << "," << emb[r].scalar_width()
       << "," << emb[r].vector_width() << "\n";
  }
  const std::string header = hs.str();

  std::vector<uint8_t> bin;
  bin.insert(bin.end(), {'P', 'C', 'C', 'E'});
  append_u32(bin, 1);
  append_u32(bin, static_cast<uint32_t>(header.size()));
  append_raw(bin, header.data(), header.size());
  append_raw(bin, ro.data(), static_cast<size_t>(ro.size()));
  for (int r = 0; r < 4; ++r) {
    // row-major, matching the text layout
    for (Eigen::Index i = 0; i < emb[r].count(); ++i) {
      for (int c = 0; c < emb[r].scalar_width(); ++c) {
        const T v = emb[r].s(i, c);
        append_raw(bin, &v, 1);
      }
    }
    for (Eigen::Index i = 0; i < emb[r].count(); ++i) {
      for (int c = 0; c < emb[r].vector_width(); ++c) {
        for (int k = 0; k < 3; ++k) {
          const T v = emb[r].v[k](i, c);
          append_raw(bin, &v, 1);
        }
      }
    }
  }
  pcc::write_file_atomic(bin_path, bin);
}

int run_featurize(const FeaturizeArgs& a) {
  if (a.knn < 1) throw pcc::BadConfig("--knn must be at least 1");
  if (a.min_sse < 1) throw pcc::BadConfig("--min-sse must be at least 1");
  if (a.inputs.size() > 1 && (!a.sse_from.empty() || !a.threedi_from.empty())) {
    throw pcc::BadConfig(
        "--sse-from/--3di-from apply to a single input structure");
  }
  pcc::PipelineOptions opt;
  opt.knn = a.knn;
  opt.min_sse = a.min_sse;
  opt.with_sequence = !a.no_sequence;
  if (!a.sse_from.empty()) opt.sse_override = file_text(a.sse_from);
  if (!a.threedi_from.empty()) opt.threedi = file_text(a.threedi_from);

  fs::create_directories(a.out_dir);

  struct Outcome {
    bool ok = false;
    std::string line;  // stdout on success, stderr otherwise
    std::string note;
  };
  std::vector<Outcome> results(a.inputs.size());

  size_t workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PCC_THREADS")) {
    workers = static_cast<size_t>(std::max(1, std::atoi(env)));
  }
  workers = std::min(workers, a.inputs.size());

  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (size_t i = cursor.fetch_add(1); i < a.inputs.size();
         i = cursor.fetch_add(1)) {
      const std::string& path = a.inputs[i];
      Outcome& out = results[i];
      try {
        pcc::ProteinStructure s = pcc::parse_pdb_file(path);
        const pcc::ValidationReport report = pcc::validate_backbone(s);
        pcc::Pipeline pipe = pcc::run_pipeline(std::move(s), opt);
        const pcc::Bundle bundle = pcc::bundle_from_pipeline(pipe, opt);
        const fs::path dst =
            fs::path(a.out_dir) / (fs::path(path).stem().string() + ".pcc");
        pcc::save_bundle(dst.string(), bundle);
        std::ostringstream line;
        line << "wrote " << dst.string() << " (" << pipe.structure.size()
             << " residues, " << pipe.cc.edges().size() << " edges, "
             << pipe.cc.cells().size() << " cells)";
        out.line = line.str();
        if (!report.chain_breaks.empty()) {
          out.note = "note: " + path + ": " +
                     std::to_string(report.chain_breaks.size()) +
                     " chain break(s)";
        }
        out.ok = true;
      } catch (const std::exception& e) {
        out.line = "featurize: " + path + ": " + e.what();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }

  size_t failures = 0;
  for (const Outcome& out : results) {
    if (out.ok) {
      std::cout << out.line << "\n";
      if (!out.note.empty()) std::cerr << out.note << "\n";
    } else {
      std::cerr << out.line << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 2;
}

int run_forward(const ForwardArgs& a) {
  const pcc::Bundle bundle = pcc::load_bundle(a.bundle);
  pcc::ModelParams params;
  if (!a.params.empty()) {
    params = pcc::load_params(a.params);
  } else {
    pcc::ModelConfig config;
    config.seed = a.seed;
    params = pcc::init_params(config);
  }
  const pcc::ProteinCC cc = pcc::rebuild_cc(bundle);
  const pcc::ScalarizerSet scal = pcc::build_scalarizers(cc, bundle.centered);

  pcc::ReadoutMode mode = pcc::ReadoutMode::MeanPool;
  if (a.readout == "sum") mode = pcc::ReadoutMode::SumPool;
  if (a.readout == "protein") mode = pcc::ReadoutMode::ProteinChannel;

  std::string base = a.out_base;
  if (base.empty()) {
    fs::path p(a.bundle);
    base = (p.parent_path() / p.stem()).string() + "_emb";
  }
  const std::string txt = base + ".txt", bin = base + ".bin";

  Eigen::Index width = 0;
  if (a.f32) {
    const auto emb = pcc::forward_f32(params, cc, bundle.features, scal);
    const Eigen::VectorXf ro = pcc::readout_f32(emb, mode);
    width = ro.size();
    write_embedding_files<float>(txt, bin, emb, ro, a.readout);
  } else {
    const auto emb = pcc::forward(params, cc, bundle.features, scal);
    const Eigen::VectorXd ro = pcc::readout(emb, mode);
    width = ro.size();
    write_embedding_files<double>(txt, bin, emb, ro, a.readout);
  }
  std::cout << "readout " << a.readout << " width " << width << "\n";
  std::cout << "wrote " << txt << "\n";
  std::cout << "wrote " << bin << "\n";
  return 0;
}

int run_check(const CheckArgs& a) {
  const std::vector<pcc::CheckResult> results =
      pcc::run_suite(a.suite, a.seed, a.trials);
  std::cout << "suite: " << a.suite << "\n";
  std::cout << "seed: " << a.seed << "\n";
  size_t passed = 0;
  for (const pcc::CheckResult& r : results) {
    passed += r.pass;
    std::cout << std::left << std::setw(5) << (r.pass ? "ok" : "FAIL")
              << std::setw(28) << r.name << " " << r.detail << "\n";
  }
  std::cout << "checks: " << passed << " passed, " << results.size() - passed
            << " failed\n";
  return passed == results.size() ? 0 : 1;
}

int run_bench(const BenchArgs& a) {
  constexpr int kRuns = 5;
  std::cout << std::right << std::setw(6) << "size" << std::setw(16)
            << "featurize_ms" << std::setw(14) << "forward_ms" << "\n";
  for (int size : a.sizes) {
    if (size < 2) throw pcc::BadConfig("--sizes entries must be at least 2");
    std::vector<double> feat, fwd;
    for (int r = 0; r < kRuns; ++r) {
      const pcc::BenchReport rep = pcc::time_pipeline(size, a.seed, 6);
      feat.push_back(rep.featurize_ms);
      fwd.push_back(rep.forward_ms);
    }
    std::sort(feat.begin(), feat.end());
    std::sort(fwd.begin(), fwd.end());
    std::cout << std::setw(6) << size << std::fixed << std::setprecision(2)
              << std::setw(16) << feat[kRuns / 2] << std::setw(14)
              << fwd[kRuns / 2] << "\n";
    std::cout.unsetf(std::ios::fixed);
  }
  return 0;
}

int run_inspect(const InspectArgs& a) {
  const pcc::Bundle b = pcc::load_bundle(a.bundle);
  const int n = static_cast<int>(b.centered.size());
  std::cout << "source: " << b.source_id << "\n";
  std::cout << "residues: " << n << "\n";
  std::cout << "1-cells: " << b.edges.size() << " (knn " << b.knn << ")\n";

  int h = 0, e = 0, c = 0;
  for (const pcc::SseCell& cell : b.cells) {
    if (cell.label == 'H') ++h;
    if (cell.label == 'E') ++e;
    if (cell.label == 'C') ++c;
  }
  std::cout << "2-cells: " << b.cells.size();
  if (!b.cells.empty()) {
    std::cout << " (";
    const std::array<std::pair<char, int>, 3> mix{{{'H', h}, {'E', e}, {'C', c}}};
    bool first = true;
    for (const auto& [label, count] : mix) {
      if (count == 0) continue;
      if (!first) std::cout << ", ";
      std::cout << label << "×" << count;
      first = false;
    }
    std::cout << ")";
  }
  std::cout << "\n";
  std::cout << "3-cells: 1\n";

  if (n > 0 && n <= 100) std::cout << "sse: " << b.sse << "\n";
  std::cout << "feature widths: scalars (";
  for (int r = 0; r < 4; ++r) {
    std::cout << (r ? "," : "") << b.features.rank[r].scalar_width();
  }
  std::cout << "), vectors (";
  for (int r = 0; r < 4; ++r) {
    std::cout << (r ? "," : "") << b.features.rank[r].vector_width();
  }
  std::cout << ")\n";

  std::cout << "matrix nnz:";
  for (size_t m = 0; m < b.matrices.size(); ++m) {
    std::cout << " " << pcc::kBundleMatrixNames[m] << "="
              << b.matrices[m].nnz();
  }
  std::cout << "\n";
  std::cout << "flags: sequence " << (b.sequence_withheld ? "withheld" : "kept")
            << ", labels " << (b.sse_from_file ? "from file" : "assigned")
            << ", 3di " << (b.threedi.empty() ? "absent" : "present") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Protein combinatorial-complex featurizer and network"};
  app.require_subcommand(1);

  FeaturizeArgs fa;
  CLI::App* feat = app.add_subcommand(
      "featurize", "Parse structures and write featurized complex bundles");
  feat->add_option("inputs", fa.inputs, "structure files (PDB format)")
      ->required();
  feat->add_option("-o,--out-dir", fa.out_dir, "output directory")
      ->capture_default_str();
  feat->add_option("--knn", fa.knn, "neighbors per residue")
      ->capture_default_str();
  feat->add_option("--min-sse", fa.min_sse, "minimum run length for a 2-cell")
      ->capture_default_str();
  feat->add_flag("--no-sequence", fa.no_sequence,
                 "withhold residue identities from the features");
  feat->add_option("--sse-from", fa.sse_from,
                   "read H/E/C labels from a file, one per line");
  feat->add_option("--3di-from", fa.threedi_from,
                   "read structural-alphabet letters from a file, one per line");

  ForwardArgs wa;
  CLI::App* fwd = app.add_subcommand(
      "forward", "Run the network over a featurized bundle");
  fwd->add_option("bundle", wa.bundle, "bundle file from featurize")
      ->required();
  fwd->add_option("-p,--params", wa.params,
                  "parameter blob; omitted means fresh seeded init");
  fwd->add_option("--seed", wa.seed, "init seed when no parameter blob given")
      ->capture_default_str();
  fwd->add_option("--readout", wa.readout, "protein vector reduction")
      ->check(CLI::IsMember({"mean", "sum", "protein"}))
      ->capture_default_str();
  fwd->add_flag("--f32", wa.f32, "single-precision forward pass");
  fwd->add_option("-o,--out", wa.out_base,
                  "output base path (writes <base>.txt and <base>.bin)");

  CheckArgs ca;
  CLI::App* chk = app.add_subcommand("check", "Run a verification suite");
  chk->add_option("--suite", ca.suite,
                  "equivariance | algebra | geometry | all")
      ->capture_default_str();
  chk->add_option("--seed", ca.seed, "randomness seed")->capture_default_str();
  chk->add_option("--trials", ca.trials,
                  "randomized trial count (0 means suite default)")
      ->capture_default_str();

  BenchArgs ba;
  CLI::App* ben = app.add_subcommand(
      "bench", "Time featurization and forward passes on synthetic chains");
  ben->add_option("--sizes", ba.sizes, "residue counts to time")
      ->capture_default_str();
  ben->add_option("--seed", ba.seed, "fixture seed")->capture_default_str();

  InspectArgs ia;
  CLI::App* ins =
      app.add_subcommand("inspect", "Summarize a featurized bundle");
  ins->add_option("bundle", ia.bundle, "bundle file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    if (feat->parsed()) return run_featurize(fa);
    if (fwd->parsed()) return run_forward(wa);
    if (chk->parsed()) return run_check(ca);
    if (ben->parsed()) return run_bench(ba);
    if (ins->parsed()) return run_inspect(ia);
  } catch (const pcc::BadConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 64;
  } catch (const pcc::BlobError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const pcc::FileUnreadable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const pcc::ShapeMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 65;
  } catch (const pcc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
