#include "cofmat/io.hpp"

#include "cofmat/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace cofmat::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << x;
  return os.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return os.str();
}

std::string matrix_market(const Matrix& m) {
  std::string s = "%%MatrixMarket matrix array real general\n";
  s += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) s += format_double(m(i, j)) + "\n";
  return s;
}

void write_matrix_market(const fs::path& path, const Matrix& m) {
  write_file_atomic(path, matrix_market(m));
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

Matrix read_matrix_market(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw DomainError(path.string() + ": empty MatrixMarket file");
  std::istringstream header(lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix") {
    throw DomainError(path.string() + ": missing MatrixMarket banner");
  }
  if (field != "real" && field != "integer" && field != "double") {
    throw DomainError(path.string() + ": unsupported field '" + field + "'");
  }
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") {
    throw DomainError(path.string() + ": unsupported symmetry '" + symmetry + "'");
  }
  do {
    if (!std::getline(in, line)) throw DomainError(path.string() + ": missing size line");
  } while (line.empty() || line[0] == '%');
  std::istringstream size(line);
  Index rows = 0, cols = 0, nnz = 0;
  size >> rows >> cols;
  if (format == "coordinate") size >> nnz;
  if (!size || rows < 1 || cols < 1) throw DomainError(path.string() + ": bad size line");

  Matrix m = Matrix::Zero(rows, cols);
  auto next_value = [&](auto&... vals) {
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '%') continue;
      std::istringstream ls(line);
      ls.imbue(std::locale::classic());
      (ls >> ... >> vals);
      if (!ls) throw DomainError(path.string() + ": malformed entry '" + line + "'");
      return;
    }
    throw DomainError(path.string() + ": truncated data");
  };
  if (format == "array") {
    for (Index j = 0; j < cols; ++j)
      for (Index i = symmetric ? j : 0; i < rows; ++i) {
        double v = 0;
        next_value(v);
        m(i, j) = v;
        if (symmetric) m(j, i) = v;
      }
  } else if (format == "coordinate") {
    for (Index k = 0; k < nnz; ++k) {
      Index i = 0, j = 0;
      double v = 0;
      next_value(i, j, v);
      if (i < 1 || j < 1 || i > rows || j > cols) {
        throw DomainError(path.string() + ": index out of range");
      }
      m(i - 1, j - 1) += v;
      if (symmetric && i != j) m(j - 1, i - 1) += v;
    }
  } else {
    throw DomainError(path.string() + ": unsupported format '" + format + "'");
  }
  if (!m.allFinite()) throw DomainError(path.string() + ": non-finite entries");
  return m;
}

std::vector<fs::path> save_block_system(const fs::path& dir, const std::string& stem,
                                        const BlockSystem& sys) {
  std::vector<fs::path> written;
  nlohmann::json j;
  j["names"] = sys.names;
  j["dims"] = sys.dims;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& [key, m] : sys.blocks) {
    const std::string file = stem + "_" + std::to_string(key.first) + "_" +
                             std::to_string(key.second) + ".mtx";
    write_matrix_market(dir / file, m);
    written.push_back(dir / file);
    blocks.push_back({{"row", key.first},
                      {"col", key.second},
                      {"name", sys.names[static_cast<std::size_t>(key.first)] + "<-" +
                                   sys.names[static_cast<std::size_t>(key.second)]},
                      {"file", file}});
  }
  j["blocks"] = blocks;
  nlohmann::json cert = nlohmann::json::object();
  for (const auto& [name, v] : sys.certificates) {
    cert[name] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(format_double(v));
  }
  j["certificates"] = cert;
  j["phase"] = {{"kisynski", sys.phase.kisynski.label()}, {"base", sys.phase.base.label()}};
  const fs::path manifest = dir / (stem + ".json");
  write_file_atomic(manifest, j.dump(2) + "\n");
  written.push_back(manifest);
  return written;
}

LoadedSystem load_block_system(const fs::path& manifest) {
  const nlohmann::json j = nlohmann::json::parse(read_file(manifest));
  LoadedSystem out;
  out.names = j.at("names").get<std::vector<std::string>>();
  out.dims = j.at("dims").get<std::vector<Index>>();
  if (out.names.size() != out.dims.size()) {
    throw DimensionError(manifest.string() + ": names and dims differ in length");
  }
  std::vector<Index> offsets{0};
  for (Index d : out.dims) offsets.push_back(offsets.back() + d);
  out.assembled = Matrix::Zero(offsets.back(), offsets.back());
  for (const auto& b : j.at("blocks")) {
    const int r = b.at("row").get<int>();
    const int c = b.at("col").get<int>();
    if (r < 0 || c < 0 || r >= static_cast<int>(out.dims.size()) ||
        c >= static_cast<int>(out.dims.size())) {
      throw DimensionError(manifest.string() + ": block index out of range");
    }
    Matrix m = read_matrix_market(manifest.parent_path() / b.at("file").get<std::string>());
    if (m.rows() != out.dims[static_cast<std::size_t>(r)] ||
        m.cols() != out.dims[static_cast<std::size_t>(c)]) {
      throw DimensionError(manifest.string() + ": block (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") has the wrong shape");
    }
    out.assembled.block(offsets[static_cast<std::size_t>(r)], offsets[static_cast<std::size_t>(c)],
                        m.rows(), m.cols()) = m;
    out.blocks[{r, c}] = std::move(m);
  }
  return out;
}

}  // namespace cofmat::io
