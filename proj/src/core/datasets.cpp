#include "core/datasets.hpp"

#include <Eigen/SVD>

#include <array>
#include <fstream>
#include <sstream>

namespace glg {

namespace {

// ---------------------------------------------------------------------------
// SHA-256
// ---------------------------------------------------------------------------

constexpr std::array<std::uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

struct Sha256 {
  std::array<std::uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                                    0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::array<std::uint8_t, 64> buf{};
  std::uint64_t total = 0;
  size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

  void block(const std::uint8_t* p) {
    std::array<std::uint32_t, 64> w{};
    for (int i = 0; i < 16; ++i)
      w[size_t(i)] = std::uint32_t(p[4 * i]) << 24 | std::uint32_t(p[4 * i + 1]) << 16 |
                     std::uint32_t(p[4 * i + 2]) << 8 | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 =
          rotr(w[size_t(i - 15)], 7) ^ rotr(w[size_t(i - 15)], 18) ^ (w[size_t(i - 15)] >> 3);
      const std::uint32_t s1 =
          rotr(w[size_t(i - 2)], 17) ^ rotr(w[size_t(i - 2)], 19) ^ (w[size_t(i - 2)] >> 10);
      w[size_t(i)] = w[size_t(i - 16)] + s0 + w[size_t(i - 7)] + s1;
    }
    auto [a, b, c, d, e, f, g, hh] = h;
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + s1 + ch + kSha256K[size_t(i)] + w[size_t(i)];
      const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = s0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }

  void update(const std::uint8_t* p, size_t len) {
    total += len;
    while (len > 0) {
      const size_t take = std::min(len, buf.size() - fill);
      std::copy(p, p + take, buf.begin() + long(fill));
      fill += take;
      p += take;
      len -= take;
      if (fill == buf.size()) {
        block(buf.data());
        fill = 0;
      }
    }
  }

  std::string hex() {
    const std::uint64_t bits = total * 8;
    const std::uint8_t one = 0x80;
    update(&one, 1);
    const std::uint8_t zero = 0x00;
    while (fill != 56) update(&zero, 1);
    std::array<std::uint8_t, 8> len{};
    for (int i = 0; i < 8; ++i) len[size_t(i)] = std::uint8_t(bits >> (56 - 8 * i));
    update(len.data(), 8);
    std::ostringstream os;
    for (std::uint32_t v : h)
      for (int i = 3; i >= 0; --i) {
        static const char* digits = "0123456789abcdef";
        os << digits[(v >> (8 * i + 4)) & 0xF] << digits[(v >> (8 * i)) & 0xF];
      }
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

std::vector<std::string> tokenize(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  if (delimiter == ' ') {
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
  }
  std::string tok;
  std::istringstream is(line);
  while (std::getline(is, tok, delimiter)) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, const std::string& path, size_t row,
                    Eigen::Index col) {
  try {
    size_t used = 0;
    const double v = std::stod(tok, &used);
    require(used == tok.size(), ErrorKind::parse, "");
    return v;
  } catch (...) {
    fail(ErrorKind::parse, path + ": row " + std::to_string(row + 1) + ", column " +
                               std::to_string(col + 1) + ": cannot parse '" + tok + "'");
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), ErrorKind::data_missing, path + ": cannot open");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

struct DatasetDef {
  std::string domain;
  std::string filename;
  CsvSpec spec;
};

const std::vector<DatasetDef>& tabular_defs() {
  static const std::vector<DatasetDef> defs = [] {
    std::vector<DatasetDef> v;
    {
      DatasetDef d;
      d.domain = "German Credit";
      d.filename = "german.data-numeric";
      d.spec.delimiter = ' ';
      d.spec.columns = 25;
      d.spec.label_col = 24;
      d.spec.label_map = {{"1", 1}, {"2", -1}};
      v.push_back(std::move(d));
    }
    {
      DatasetDef d;
      d.domain = "Australian Credit";
      d.filename = "australian.dat";
      d.spec.delimiter = ' ';
      d.spec.columns = 15;
      d.spec.label_col = 14;
      d.spec.label_map = {{"1", 1}, {"0", -1}};
      v.push_back(std::move(d));
    }
    {
      DatasetDef d;
      d.domain = "Breast Cancer Wisconsin (Original)";
      d.filename = "breast-cancer-wisconsin.data";
      d.spec.delimiter = ',';
      d.spec.columns = 11;
      d.spec.label_col = 10;
      d.spec.drop_cols = {0};
      d.spec.label_map = {{"2", 1}, {"4", -1}};
      d.spec.drop_missing_rows = true;
      v.push_back(std::move(d));
    }
    {
      DatasetDef d;
      d.domain = "Breast Cancer Wisconsin (Diagnostic)";
      d.filename = "wdbc.data";
      d.spec.delimiter = ',';
      d.spec.columns = 32;
      d.spec.label_col = 1;
      d.spec.drop_cols = {0};
      d.spec.label_map = {{"B", 1}, {"M", -1}};
      v.push_back(std::move(d));
    }
    return v;
  }();
  return defs;
}

struct TextDef {
  std::string domain;
  std::string src_file;
  std::string tar_file;
  Eigen::Index dim;
};

const std::vector<TextDef>& text_defs() {
  static const std::vector<TextDef> defs = {
      {"OrgsPeople", "orgs_people_src.dat", "orgs_people_tar.dat", 4771},
      {"OrgsPlaces", "orgs_places_src.dat", "orgs_places_tar.dat", 4415},
      {"PeoplePlaces", "people_places_src.dat", "people_places_tar.dat", 4562},
  };
  return defs;
}

LabeledDomain load_text_domain(const TextDef& def, const std::string& data_dir, bool reduce) {
  const std::map<std::string, int> label_map = {{"1", 1}, {"+1", 1}, {"-1", -1}};
  LabeledDomain src = load_sparse(data_dir + "/" + def.src_file, def.dim, label_map);
  LabeledDomain tar = load_sparse(data_dir + "/" + def.tar_file, def.dim, label_map);
  LabeledDomain out;
  out.name = def.domain;
  out.X.resize(src.X.rows() + tar.X.rows(), def.dim);
  out.X.topRows(src.X.rows()) = src.X;
  out.X.bottomRows(tar.X.rows()) = tar.X;
  out.y = src.y;
  out.y.insert(out.y.end(), tar.y.begin(), tar.y.end());
  if (reduce) {
    const Eigen::Index before = out.X.cols();
    out.X = svd_reduce(out.X, 0.5);
    out.notes.push_back(def.domain + ": compressed " + std::to_string(before) + " -> " +
                        std::to_string(out.X.cols()) + " features");
  }
  return out;
}

LabeledDomain load_domain_impl(const std::string& name, const std::string& data_dir,
                               bool reduce_text) {
  for (const DatasetDef& def : tabular_defs()) {
    if (def.domain != name) continue;
    LabeledDomain d = load_delimited(data_dir + "/" + def.filename, def.spec);
    d.name = name;
    return d;
  }
  for (const TextDef& def : text_defs()) {
    if (def.domain != name) continue;
    return load_text_domain(def, data_dir, reduce_text);
  }
  fail(ErrorKind::invalid_arg, "unknown domain '" + name + "'");
}

}  // namespace

const std::vector<TaskSpec>& task_registry() {
  static const std::vector<TaskSpec> tasks = {
      {"G2A", "German Credit", "Australian Credit", "Good"},
      {"A2G", "Australian Credit", "German Credit", "Good"},
      {"Ope2Opl", "OrgsPeople", "OrgsPlaces", "Orgs"},
      {"Opl2Ope", "OrgsPlaces", "OrgsPeople", "Orgs"},
      {"Opl2Ppl", "OrgsPlaces", "PeoplePlaces", "Places"},
      {"Ppl2Opl", "PeoplePlaces", "OrgsPlaces", "Places"},
      {"Ppl2Ope", "PeoplePlaces", "OrgsPeople", "-"},
      {"Ope2Ppl", "OrgsPeople", "PeoplePlaces", "-"},
      {"CO2CD", "Breast Cancer Wisconsin (Original)", "Breast Cancer Wisconsin (Diagnostic)",
       "Benign"},
      {"CD2CO", "Breast Cancer Wisconsin (Diagnostic)", "Breast Cancer Wisconsin (Original)",
       "Benign"},
  };
  return tasks;
}

const TaskSpec& find_task(const std::string& code) {
  for (const TaskSpec& t : task_registry())
    if (t.code == code) return t;
  fail(ErrorKind::invalid_arg, "unknown task '" + code + "'");
}

const std::vector<DataFile>& expected_files() {
  static const std::vector<DataFile> files = {
      {"german.data-numeric", "2752b044394958ab6dd193a0b56ca0f0b3a2d8bc7cb8c008e35a5e84bbec02f8",
       false,
       "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/german/"
       "german.data-numeric"},
      {"australian.dat", "896943151f8cfae1e0229b8aeb6a68b905c97bc59d10c68f082a6ea0161b869f",
       false,
       "https://archive.ics.uci.edu/ml/machine-learning-databases/statlog/australian/"
       "australian.dat"},
      {"breast-cancer-wisconsin.data",
       "402c585309c399237740f635ef9919dc512cca12cbeb20de5e563a4593f22b64", false,
       "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/"
       "breast-cancer-wisconsin.data"},
      {"wdbc.data", "d606af411f3e5be8a317a5a8b652b425aaf0ff38ca683d5327ffff94c3695f4a", false,
       "https://archive.ics.uci.edu/ml/machine-learning-databases/breast-cancer-wisconsin/"
       "wdbc.data"},
      {"orgs_people_src.dat", "", true, ""},
      {"orgs_people_tar.dat", "", true, ""},
      {"orgs_places_src.dat", "", true, ""},
      {"orgs_places_tar.dat", "", true, ""},
      {"people_places_src.dat", "", true, ""},
      {"people_places_tar.dat", "", true, ""},
  };
  return files;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(bool(in), ErrorKind::data_missing, path + ": cannot open");
  Sha256 hasher;
  std::array<char, 65536> chunk;
  while (in) {
    in.read(chunk.data(), std::streamsize(chunk.size()));
    hasher.update(reinterpret_cast<const std::uint8_t*>(chunk.data()), size_t(in.gcount()));
  }
  return hasher.hex();
}

std::vector<FileStatus> verify_data_dir(const std::string& data_dir, bool verify_checksums) {
  std::vector<FileStatus> out;
  for (const DataFile& f : expected_files()) {
    FileStatus st;
    st.filename = f.filename;
    st.optional = f.optional;
    const std::string path = data_dir + "/" + f.filename;
    std::ifstream probe(path, std::ios::binary);
    st.present = bool(probe);
    if (!st.present) {
      st.detail = f.optional ? "missing (optional)" : "missing";
      out.push_back(std::move(st));
      continue;
    }
    if (verify_checksums && !f.sha256.empty()) {
      const std::string got = sha256_file(path);
      st.checksum_ok = got == f.sha256;
      if (!st.checksum_ok) st.detail = "checksum mismatch: got " + got;
    } else {
      st.checksum_ok = true;
    }
    out.push_back(std::move(st));
  }

  // Parse every domain whose files are all present.
  auto status_of = [&](const std::string& filename) -> FileStatus* {
    for (FileStatus& st : out)
      if (st.filename == filename) return &st;
    return nullptr;
  };
  for (const DatasetDef& def : tabular_defs()) {
    FileStatus* st = status_of(def.filename);
    if (!st->present) continue;
    try {
      LabeledDomain d = load_domain_impl(def.domain, data_dir, false);
      st->parsed_ok = true;
      st->detail += (st->detail.empty() ? "" : "; ") + std::to_string(d.X.rows()) + "x" +
                    std::to_string(d.X.cols());
    } catch (const Error& e) {
      st->detail += (st->detail.empty() ? "" : "; ") + std::string(e.what());
    }
  }
  for (const TextDef& def : text_defs()) {
    FileStatus* src = status_of(def.src_file);
    FileStatus* tar = status_of(def.tar_file);
    if (!src->present || !tar->present) continue;
    try {
      LabeledDomain d = load_domain_impl(def.domain, data_dir, false);
      src->parsed_ok = tar->parsed_ok = true;
      src->detail += (src->detail.empty() ? "" : "; ") + std::to_string(d.X.rows()) + "x" +
                     std::to_string(d.X.cols());
    } catch (const Error& e) {
      src->detail += (src->detail.empty() ? "" : "; ") + std::string(e.what());
      tar->detail = src->detail;
    }
  }
  return out;
}

LabeledDomain load_domain(const std::string& name, const std::string& data_dir) {
  return load_domain_impl(name, data_dir, true);
}

LabeledDomain load_delimited(const std::string& path, const CsvSpec& spec) {
  const std::vector<std::string> lines = read_lines(path);
  require(!lines.empty(), ErrorKind::parse, path + ": no data rows");

  std::vector<bool> keep_col(size_t(spec.columns), true);
  keep_col[size_t(spec.label_col)] = false;
  for (Eigen::Index c : spec.drop_cols) keep_col[size_t(c)] = false;
  Eigen::Index width = 0;
  for (bool k : keep_col) width += k ? 1 : 0;

  LabeledDomain out;
  std::vector<Vec> rows;
  Eigen::Index dropped = 0;
  for (size_t r = 0; r < lines.size(); ++r) {
    const std::vector<std::string> toks = tokenize(lines[r], spec.delimiter);
    require(Eigen::Index(toks.size()) == spec.columns, ErrorKind::parse,
            path + ": row " + std::to_string(r + 1) + " has " + std::to_string(toks.size()) +
                " fields, expected " + std::to_string(spec.columns));
    bool missing = false;
    for (Eigen::Index c = 0; c < spec.columns && !missing; ++c)
      missing = keep_col[size_t(c)] && toks[size_t(c)] == spec.missing_token;
    if (missing) {
      require(spec.drop_missing_rows, ErrorKind::parse,
              path + ": row " + std::to_string(r + 1) + " has a missing value");
      ++dropped;
      continue;
    }

    const std::string& lab = toks[size_t(spec.label_col)];
    auto it = spec.label_map.find(lab);
    require(it != spec.label_map.end(), ErrorKind::parse,
            path + ": row " + std::to_string(r + 1) + ": unknown label '" + lab + "'");
    out.y.push_back(it->second);

    Vec row(width);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < spec.columns; ++c)
      if (keep_col[size_t(c)]) row(k++) = parse_number(toks[size_t(c)], path, r, c);
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::parse, path + ": every row was dropped");

  out.X.resize(Eigen::Index(rows.size()), width);
  for (size_t r = 0; r < rows.size(); ++r) out.X.row(Eigen::Index(r)) = rows[r];
  if (dropped > 0)
    out.notes.push_back(path + ": dropped " + std::to_string(dropped) +
                        " rows with missing values");
  return out;
}

LabeledDomain load_sparse(const std::string& path, Eigen::Index dim,
                          const std::map<std::string, int>& label_map) {
  const std::vector<std::string> lines = read_lines(path);
  require(!lines.empty(), ErrorKind::parse, path + ": no data rows");
  LabeledDomain out;
  out.X = Mat::Zero(Eigen::Index(lines.size()), dim);
  for (size_t r = 0; r < lines.size(); ++r) {
    const std::vector<std::string> toks = tokenize(lines[r], ' ');
    require(!toks.empty(), ErrorKind::parse, path + ": row " + std::to_string(r + 1) + " empty");
    auto it = label_map.find(toks[0]);
    require(it != label_map.end(), ErrorKind::parse,
            path + ": row " + std::to_string(r + 1) + ": unknown label '" + toks[0] + "'");
    out.y.push_back(it->second);
    for (size_t t = 1; t < toks.size(); ++t) {
      const size_t colon = toks[t].find(':');
      require(colon != std::string::npos, ErrorKind::parse,
              path + ": row " + std::to_string(r + 1) + ": bad feature token '" + toks[t] + "'");
      const long idx = std::strtol(toks[t].substr(0, colon).c_str(), nullptr, 10);
      require(idx >= 1 && idx <= dim, ErrorKind::index_range,
              path + ": row " + std::to_string(r + 1) + ": feature index " +
                  std::to_string(idx) + " outside 1.." + std::to_string(dim));
      out.X(Eigen::Index(r), Eigen::Index(idx - 1)) =
          parse_number(toks[t].substr(colon + 1), path, r, Eigen::Index(idx - 1));
    }
  }
  return out;
}

Mat svd_reduce(const Mat& X, double fraction) {
  require(fraction > 0.0 && fraction <= 1.0, ErrorKind::invalid_arg,
          "svd_reduce: fraction must lie in (0, 1]");
  Eigen::BDCSVD<Mat> svd(X, Eigen::ComputeThinV);
  const Vec& sigma = svd.singularValues();
  const double tol = sigma.size() > 0 ? sigma(0) * 1e-10 : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > tol) ++rank;
  require(rank >= 1, ErrorKind::degenerate, "svd_reduce: zero-rank input");
  const Eigen::Index keep = Eigen::Index(std::ceil(fraction * double(rank)));
  return X * svd.matrixV().leftCols(keep);
}

LabeledDomain sample_unbiased(const LabeledDomain& d, Eigen::Index n, std::uint64_t seed) {
  require(!d.y.empty(), ErrorKind::invalid_arg, "sample_unbiased: unlabeled domain");
  require(n >= 2 && n % 2 == 0, ErrorKind::invalid_arg,
          "sample_unbiased: sample size must be even and positive");
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index t = 0; t < d.X.rows(); ++t) (d.y[size_t(t)] == 1 ? pos : neg).push_back(t);
  const Eigen::Index half = n / 2;
  require(Eigen::Index(pos.size()) >= half && Eigen::Index(neg.size()) >= half,
          ErrorKind::single_class,
          "sample_unbiased: a class has fewer than " + std::to_string(half) + " instances");

  Rng rng(seed);
  std::vector<Eigen::Index> pick;
  for (Eigen::Index k : rng.sample_without_replacement(Eigen::Index(pos.size()), half))
    pick.push_back(pos[size_t(k)]);
  for (Eigen::Index k : rng.sample_without_replacement(Eigen::Index(neg.size()), half))
    pick.push_back(neg[size_t(k)]);
  rng.shuffle(pick);

  LabeledDomain out;
  out.name = d.name;
  out.notes = d.notes;
  out.X.resize(n, d.X.cols());
  out.y.resize(size_t(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    out.X.row(t) = d.X.row(pick[size_t(t)]);
    out.y[size_t(t)] = d.y[size_t(pick[size_t(t)])];
  }
  return out;
}

LabeledDomain permute_domain(const LabeledDomain& d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::Index> rows = iota_indices(d.X.rows());
  std::vector<Eigen::Index> cols = iota_indices(d.X.cols());
  rng.shuffle(rows);
  rng.shuffle(cols);
  LabeledDomain out;
  out.name = d.name;
  out.notes = d.notes;
  out.X.resize(d.X.rows(), d.X.cols());
  for (Eigen::Index i = 0; i < d.X.rows(); ++i)
    for (Eigen::Index j = 0; j < d.X.cols(); ++j)
      out.X(i, j) = d.X(rows[size_t(i)], cols[size_t(j)]);
  if (!d.y.empty()) {
    out.y.resize(d.y.size());
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) out.y[size_t(i)] = d.y[size_t(rows[size_t(i)])];
  }
  return out;
}

}  // namespace glg
