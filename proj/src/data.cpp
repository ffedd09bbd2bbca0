#include "wpfm/data.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wpfm/errors.hpp"
#include "wpfm/io_util.hpp"
#include "wpfm/manifold.hpp"
#include "wpfm/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "feature files assume a little-endian host");

namespace wpfm {

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

constexpr char kFeatMagic[8] = {'W', 'P', 'F', 'M', 'F', 'E', 'A', 'T'};
constexpr uint32_t kFeatVersion = 1;

// Stream tags for derived seeds; the class structure must not change when
// only the number of drawn samples does.
constexpr uint64_t kTagMeans = 1;
constexpr uint64_t kTagConditions = 2;
constexpr uint64_t kTagTrain = 3;
constexpr uint64_t kTagHoldout = 4;

constexpr double kPi = 3.14159265358979323846;

void validate_spec(const SyntheticTaskSpec& spec) {
  if (spec.d < 2) throw DegenerateInput("task: d must be >= 2");
  if (spec.n_classes < 1) throw DegenerateInput("task: n_classes must be >= 1");
  if (spec.c_dim < 1) throw DegenerateInput("task: c_dim must be >= 1");
  if (spec.shots_per_class < 1 || spec.holdout_per_class < 0) {
    throw DegenerateInput("task: sample counts must be positive");
  }
  if (!(spec.kappa_src >= 0.0)) throw DegenerateInput("task: kappa_src < 0");
  if (!(spec.r_tgt > kEpsNorm)) throw DegenerateInput("task: r_tgt too small");
  if (!(spec.min_sep >= 0.0) || spec.min_sep >= kPi) {
    throw DegenerateInput("task: min_sep must be in [0, pi)");
  }
}

std::vector<Vec> draw_class_means(const SyntheticTaskSpec& spec) {
  Rng rng(derive_seed(spec.seed, kTagMeans));
  std::vector<Vec> means;
  const int max_attempts = 100000;
  int attempts = 0;
  while (static_cast<int>(means.size()) < spec.n_classes) {
    if (++attempts > max_attempts) {
      throw SeparationFailure(
          "task: could not place class means with min_sep " +
          std::to_string(spec.min_sep));
    }
    Vec cand = sample_uniform_sphere(rng, spec.d);
    bool ok = true;
    for (const Vec& m : means) {
      if (unit_angle(cand, m) < spec.min_sep) {
        ok = false;
        break;
      }
    }
    if (ok) means.push_back(std::move(cand));
  }
  return means;
}

// Condition for class k: column k of a fixed random projection applied to
// the one-hot label.
std::vector<Vec> draw_conditions(const SyntheticTaskSpec& spec) {
  Rng rng(derive_seed(spec.seed, kTagConditions));
  std::vector<Vec> cond(static_cast<size_t>(spec.n_classes));
  // Projection matrix c_dim x n_classes drawn row by row; class k keeps
  // column k.
  std::vector<Vec> rows(static_cast<size_t>(spec.c_dim));
  for (auto& row : rows) {
    row.resize(static_cast<size_t>(spec.n_classes));
    for (double& v : row) v = rng.normal();
  }
  for (int k = 0; k < spec.n_classes; ++k) {
    Vec c(static_cast<size_t>(spec.c_dim));
    for (int i = 0; i < spec.c_dim; ++i) {
      c[static_cast<size_t>(i)] = rows[static_cast<size_t>(i)][static_cast<size_t>(k)];
    }
    cond[static_cast<size_t>(k)] = std::move(c);
  }
  return cond;
}

PairedDataset generate_split(const SyntheticTaskSpec& spec, int per_class,
                             uint64_t stream_tag) {
  validate_spec(spec);
  std::vector<Vec> means = draw_class_means(spec);
  std::vector<Vec> conditions = draw_conditions(spec);

  PairedDataset out;
  out.d = spec.d;
  out.c_dim = spec.c_dim;
  for (int k = 0; k < spec.n_classes; ++k) {
    out.prototypes.emplace_back(
        k, scaled(means[static_cast<size_t>(k)], spec.r_tgt));
  }

  Rng rng(derive_seed(spec.seed, stream_tag));
  for (int k = 0; k < spec.n_classes; ++k) {
    const Vec& mu = means[static_cast<size_t>(k)];
    for (int s = 0; s < per_class; ++s) {
      Vec dir = sample_vmf(rng, mu, spec.kappa_src);
      if (unit_angle(dir, mu) >= kPi - 1e-3) {
        throw DegenerateInput("task: drew a source antipodal to its prototype");
      }
      double r = std::exp(rng.normal(spec.r_src_log_mean, spec.r_src_log_std));
      LabeledPair pair;
      pair.x0 = scaled(dir, r);
      pair.x1 = out.prototypes[static_cast<size_t>(k)].second;
      pair.label = k;
      pair.condition = conditions[static_cast<size_t>(k)];
      out.pairs.push_back(std::move(pair));
    }
  }
  return out;
}

void append_u32(std::string& buf, uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.append(b, 4);
}

void append_u64(std::string& buf, uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  buf.append(b, 8);
}

}  // namespace

PairedDataset generate_task(const SyntheticTaskSpec& spec) {
  return generate_split(spec, spec.shots_per_class, kTagTrain);
}

PairedDataset generate_holdout(const SyntheticTaskSpec& spec) {
  return generate_split(spec, spec.holdout_per_class, kTagHoldout);
}

void save_features(const std::string& path, const std::vector<Vec>& rows) {
  if (rows.empty()) throw EmptyGroup("save_features: no rows");
  size_t d = rows.front().size();
  if (d == 0) throw DegenerateInput("save_features: zero-dimensional rows");
  for (const Vec& r : rows) {
    if (r.size() != d) {
      throw DimensionMismatch("save_features: ragged rows");
    }
  }
  std::string buf;
  buf.reserve(24 + rows.size() * d * 4);
  buf.append(kFeatMagic, 8);
  append_u32(buf, kFeatVersion);
  append_u32(buf, static_cast<uint32_t>(d));
  append_u64(buf, static_cast<uint64_t>(rows.size()));
  for (const Vec& r : rows) {
    for (double v : r) {
      float f = static_cast<float>(v);
      char b[4];
      std::memcpy(b, &f, 4);
      buf.append(b, 4);
    }
  }
  write_file_atomic(path, buf);
}

void save_features_csv(const std::string& path, const std::vector<Vec>& rows) {
  if (rows.empty()) throw EmptyGroup("save_features_csv: no rows");
  size_t d = rows.front().size();
  std::string buf = "d=" + std::to_string(d) + "\n";
  for (const Vec& r : rows) {
    if (r.size() != d) {
      throw DimensionMismatch("save_features_csv: ragged rows");
    }
    for (size_t i = 0; i < r.size(); ++i) {
      if (i) buf += ',';
      buf += fmt_g17(r[i]);
    }
    buf += '\n';
  }
  write_file_atomic(path, buf);
}

std::vector<Vec> load_features(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() >= 8 && std::memcmp(buf.data(), kFeatMagic, 8) == 0) {
    if (buf.size() < 24) throw FormatError(path + ": truncated header");
    uint32_t version = 0, d = 0;
    uint64_t n = 0;
    std::memcpy(&version, buf.data() + 8, 4);
    std::memcpy(&d, buf.data() + 12, 4);
    std::memcpy(&n, buf.data() + 16, 8);
    if (version != kFeatVersion) {
      throw FormatError(path + ": unsupported version " +
                        std::to_string(version));
    }
    if (d == 0) throw FormatError(path + ": zero dimension");
    size_t expect = 24 + static_cast<size_t>(n) * d * 4;
    if (buf.size() != expect) {
      throw FormatError(path + ": size " + std::to_string(buf.size()) +
                        " does not match header (" + std::to_string(expect) +
                        ")");
    }
    std::vector<Vec> rows(static_cast<size_t>(n));
    const char* p = buf.data() + 24;
    for (auto& row : rows) {
      row.resize(d);
      for (uint32_t j = 0; j < d; ++j) {
        float f;
        std::memcpy(&f, p, 4);
        p += 4;
        row[j] = static_cast<double>(f);
      }
    }
    return rows;
  }

  // Text fallback: "d=<int>" header then comma-separated rows.
  std::istringstream in(buf);
  std::string line;
  if (!std::getline(in, line) || line.rfind("d=", 0) != 0) {
    throw FormatError(path + ": expected binary magic or 'd=<int>' header");
  }
  size_t d = 0;
  try {
    d = static_cast<size_t>(std::stoul(line.substr(2)));
  } catch (const std::exception&) {
    throw FormatError(path + ": bad dimension header '" + line + "'");
  }
  if (d == 0) throw FormatError(path + ": zero dimension");
  std::vector<Vec> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Vec row;
    row.reserve(d);
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() &&
               (cell[used] == ' ' || cell[used] == '\r')) {
          ++used;
        }
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw FormatError(path + ": bad number at line " +
                          std::to_string(line_no));
      }
    }
    if (row.size() != d) {
      throw FormatError(path + ": row at line " + std::to_string(line_no) +
                        " has " + std::to_string(row.size()) +
                        " values, expected " + std::to_string(d));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path + ": no data rows");
  return rows;
}

}  // namespace wpfm
