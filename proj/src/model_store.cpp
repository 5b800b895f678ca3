#include "kpod/model_store.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "kpod/error.hpp"

namespace kpod {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "blob I/O assumes a little-endian host");

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

std::string matrix_bytes(const Matrix& M) {
  return {reinterpret_cast<const char*>(M.data()), static_cast<std::size_t>(M.size()) * sizeof(double)};
}

Matrix matrix_from_bytes(const std::string& bytes, Index rows, Index cols, const std::string& name) {
  if (static_cast<std::size_t>(rows * cols) * sizeof(double) != bytes.size())
    throw Error(Errc::dimension, name + ": " + std::to_string(bytes.size()) + " bytes for a " + std::to_string(rows) +
                                     " x " + std::to_string(cols) + " matrix");
  Matrix M(rows, cols);
  std::memcpy(M.data(), bytes.data(), bytes.size());
  return M;
}

std::string adjacency_text(const ReducedGeometry& g) {
  std::string out;
  for (const auto& nb : g.adjacency) {
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (i) out += ' ';
      out += std::to_string(nb[i] + 1);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<Index>> parse_adjacency(const std::string& text, Index n) {
  std::vector<std::vector<Index>> adj;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<Index> nb;
    long long v;
    while (ls >> v) {
      if (v < 1 || v > n)
        throw Error(Errc::parse, "adjacency.txt line " + std::to_string(adj.size() + 1) + ": index out of range");
      nb.push_back(static_cast<Index>(v - 1));
    }
    if (!ls.eof()) throw Error(Errc::parse, "adjacency.txt line " + std::to_string(adj.size() + 1) + ": bad token");
    adj.push_back(std::move(nb));
  }
  if (std::ssize(adj) != n) throw Error(Errc::dimension, "adjacency.txt: expected " + std::to_string(n) + " lines");
  return adj;
}

std::string params_text(const ModelBundle& m) {
  std::string out = "index";
  for (const auto& name : m.param_names) out += "," + name;
  out += '\n';
  for (std::size_t j = 0; j < m.snapshots.params.size(); ++j) {
    out += std::to_string(j + 1);
    for (double v : m.snapshots.params[j]) out += "," + format_double(v);
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> parse_params(const std::string& text, Index n, std::size_t width) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> params;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::size_t pos = line.find(',');
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      const char* b = line.data() + pos + 1;
      const char* e = line.data() + (next == std::string::npos ? line.size() : next);
      double v = 0.0;
      const auto r = std::from_chars(b, e, v);
      if (r.ec != std::errc{} || r.ptr != e)
        throw Error(Errc::parse, "params.csv line " + std::to_string(params.size() + 2) + ": bad number");
      row.push_back(v);
      pos = next;
    }
    if (row.size() != width)
      throw Error(Errc::dimension, "params.csv line " + std::to_string(params.size() + 2) + ": wrong column count");
    params.push_back(std::move(row));
  }
  if (std::ssize(params) != n) throw Error(Errc::dimension, "params.csv: expected " + std::to_string(n) + " rows");
  return params;
}

std::string kind_name(KernelKind k) {
  switch (k) {
    case KernelKind::centroid_1d: return "centroid1d";
    case KernelKind::centroid_2d: return "centroid2d";
    case KernelKind::gaussian_euclidean: return "gaussian";
  }
  return "unknown";
}

KernelKind kind_from(const std::string& s) {
  if (s == "centroid1d") return KernelKind::centroid_1d;
  if (s == "centroid2d") return KernelKind::centroid_2d;
  if (s == "gaussian") return KernelKind::gaussian_euclidean;
  throw Error(Errc::parse, "manifest: unknown kernel kind '" + s + "'");
}

json trace_json(const BoundaryTrace& t) { return {{"nodes", t.nodes}, {"abscissa", t.abscissa}}; }

BoundaryTrace trace_from(const json& j) {
  BoundaryTrace t;
  t.nodes = j.at("nodes").get<std::vector<Index>>();
  t.abscissa = j.at("abscissa").get<std::vector<double>>();
  if (t.nodes.size() != t.abscissa.size()) throw Error(Errc::dimension, "manifest: trace nodes/abscissa mismatch");
  return t;
}

json kernel_json(const KernelSpec& k, Centering c) {
  json j = {{"kind", kind_name(k.kind)},
            {"beta", k.beta},
            {"centering", c == Centering::feature_space ? "feature_space" : "none"}};
  if (k.kind == KernelKind::centroid_1d) {
    j["domain"] = {k.domain_begin, k.domain_end};
  } else if (k.kind == KernelKind::centroid_2d) {
    j["inlet"] = trace_json(k.inlet);
    j["outlet"] = trace_json(k.outlet);
    j["scales"] = {k.inlet_scale, k.outlet_scale};
  }
  return j;
}

KernelSpec kernel_from(const json& j, Index dim) {
  KernelSpec k;
  k.kind = kind_from(j.at("kind").get<std::string>());
  k.beta = j.at("beta").get<double>();
  if (k.kind == KernelKind::centroid_1d) {
    const auto d = j.at("domain").get<std::vector<double>>();
    if (d.size() != 2) throw Error(Errc::parse, "manifest: kernel domain needs two values");
    k.domain_begin = d[0];
    k.domain_end = d[1];
  } else if (k.kind == KernelKind::centroid_2d) {
    k.inlet = trace_from(j.at("inlet"));
    k.outlet = trace_from(j.at("outlet"));
    const auto s = j.at("scales").get<std::vector<double>>();
    if (s.size() != 2) throw Error(Errc::parse, "manifest: kernel scales need two values");
    k.inlet_scale = s[0];
    k.outlet_scale = s[1];
    for (const auto* t : {&k.inlet, &k.outlet})
      for (Index i : t->nodes)
        if (i < 0 || i >= dim) throw Error(Errc::dimension, "manifest: trace node outside the state");
  }
  return k;
}

Centering centering_from(const std::string& s) {
  if (s == "feature_space") return Centering::feature_space;
  if (s == "none") return Centering::none;
  throw Error(Errc::parse, "manifest: unknown centering '" + s + "'");
}

struct FileRecord {
  std::string name;
  std::string bytes;
};

}  // namespace

std::uint32_t crc32_bytes(const void* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = static_cast<const Bytef*>(data);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void save_model(const ModelBundle& m, const fs::path& dir) {
  m.snapshots.validate();
  const Index n = m.snapshots.size();
  const KpcaModel& kp = m.kpca;
  if (kp.size() != n || kp.Z.cols() != n || m.geometry.size() != n)
    throw Error(Errc::dimension, "save_model: kPCA or geometry size differs from the snapshot count");
  if (std::ssize(m.snapshots.params) != n) throw Error(Errc::dimension, "save_model: one parameter row per snapshot");
  for (const auto& p : m.snapshots.params)
    if (p.size() != m.param_names.size()) throw Error(Errc::dimension, "save_model: parameter width differs from names");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<FileRecord> files = {
      {"X.f64le", matrix_bytes(m.snapshots.X)},
      {"Z.f64le", matrix_bytes(kp.Z)},
      {"Vstar.f64le", matrix_bytes(kp.Vstar)},
      {"G.f64le", matrix_bytes(kp.G)},
      {"adjacency.txt", adjacency_text(m.geometry)},
      {"params.csv", params_text(m)},
  };
  if (m.mesh) {
    std::ostringstream ss;
    adv2d::write_mesh(ss, *m.mesh);
    files.push_back({"mesh.txt", ss.str()});
  }

  json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["dims"] = {{"n_d", m.snapshots.dim()}, {"n_S", n}, {"k", kp.rank()}};
  manifest["epsilon"] = m.epsilon;
  manifest["kernel"] = kernel_json(kp.kernel, kp.centering);
  manifest["spectrum"] = {{"values", kp.spectrum.values}, {"rank", kp.spectrum.rank}, {"tolerance", kp.spectrum.tolerance}};
  manifest["problem"] = m.problem;
  manifest["param_names"] = m.param_names;
  json entries = json::object();
  for (const auto& f : files) {
    entries[f.name] = {{"bytes", f.bytes.size()}, {"crc32", crc32_bytes(f.bytes.data(), f.bytes.size())}};
    write_file(dir / f.name, f.bytes);
  }
  manifest["files"] = entries;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

ModelBundle load_model(const fs::path& dir) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir / "manifest.json"));
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "manifest.json: " + std::string(e.what()));
  }

  try {
    const int version = manifest.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(Errc::version, "model format version " + std::to_string(version) + " (this build reads " +
                                     std::to_string(kModelFormatVersion) + ")");

    const json& files = manifest.at("files");
    const auto load = [&](const std::string& name) {
      if (!files.contains(name)) throw Error(Errc::parse, "manifest lists no entry for " + name);
      std::string bytes = read_file(dir / name);
      const auto& rec = files.at(name);
      if (bytes.size() != rec.at("bytes").get<std::size_t>() ||
          crc32_bytes(bytes.data(), bytes.size()) != rec.at("crc32").get<std::uint32_t>())
        throw Error(Errc::checksum, "checksum mismatch in " + name);
      return bytes;
    };

    const json& dims = manifest.at("dims");
    const Index nd = dims.at("n_d").get<Index>();
    const Index n = dims.at("n_S").get<Index>();
    const Index k = dims.at("k").get<Index>();
    if (nd < 1 || n < 1 || k < 1) throw Error(Errc::dimension, "manifest: non-positive dimension");

    ModelBundle m;
    m.epsilon = manifest.at("epsilon").get<double>();
    m.problem = manifest.value("problem", json::object());
    m.param_names = manifest.at("param_names").get<std::vector<std::string>>();

    m.snapshots.X = matrix_from_bytes(load("X.f64le"), nd, n, "X.f64le");
    Matrix Z = matrix_from_bytes(load("Z.f64le"), k, n, "Z.f64le");
    Matrix Vstar = matrix_from_bytes(load("Vstar.f64le"), n, k, "Vstar.f64le");
    Matrix G = matrix_from_bytes(load("G.f64le"), n, n, "G.f64le");
    m.snapshots.params = parse_params(load("params.csv"), n, m.param_names.size());

    const json& sp = manifest.at("spectrum");
    Spectrum spectrum;
    spectrum.values = sp.at("values").get<std::vector<double>>();
    spectrum.rank = sp.at("rank").get<int>();
    spectrum.tolerance = sp.at("tolerance").get<double>();

    const json& kj = manifest.at("kernel");
    const KernelSpec kernel = kernel_from(kj, nd);
    m.kpca = kpca_restore(m.snapshots, kernel, centering_from(kj.at("centering").get<std::string>()), std::move(G),
                          std::move(Vstar), std::move(spectrum), std::move(Z));

    m.geometry.Z = m.kpca.Z;
    m.geometry.adjacency = parse_adjacency(load("adjacency.txt"), n);

    if (files.contains("mesh.txt")) {
      std::istringstream ss(load("mesh.txt"));
      m.mesh = adv2d::read_mesh(ss, (dir / "mesh.txt").string());
      if (m.mesh->node_count() != nd) throw Error(Errc::dimension, "mesh.txt: node count differs from n_d");
    }
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "manifest.json: " + std::string(e.what()));
  }
}

}  // namespace kpod
