#include "rkflab/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rkflab/errors.hpp"

namespace rkflab {

namespace {

using nlohmann::json;

const char kHeader[] = "# rkflab-dataset v1";
const char kB64Alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r > 0 ? static_cast<int>(rows.at(0).size()) : 0;
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<int>(arr.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = arr.at(i).get<double>();
  return v;
}

std::vector<std::uint8_t> doubles_to_bytes(const std::vector<Vector>& rows) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(rows.size() * (rows.empty() ? 0 : rows.front().size()) * 8);
  for (const Vector& row : rows) {
    for (int i = 0; i < row.size(); ++i) {
      std::uint64_t u;
      std::memcpy(&u, &row[i], 8);
      for (int b = 0; b < 8; ++b) bytes.push_back(static_cast<std::uint8_t>((u >> (8 * b)) & 0xFF));
    }
  }
  return bytes;
}

std::vector<Vector> bytes_to_doubles(const std::vector<std::uint8_t>& bytes, int count, int dim) {
  if (bytes.size() != static_cast<std::size_t>(count) * dim * 8)
    throw ConfigError("dataset: payload size does not match the declared shape");
  std::vector<Vector> rows;
  rows.reserve(count);
  std::size_t pos = 0;
  for (int r = 0; r < count; ++r) {
    Vector row(dim);
    for (int i = 0; i < dim; ++i) {
      std::uint64_t u = 0;
      for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * b);
      double x;
      std::memcpy(&x, &u, 8);
      row[i] = x;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* family_name(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::Gaussian:
      return "gaussian";
    case NoiseFamily::GaussianMixture:
      return "gm";
    case NoiseFamily::StudentT:
      return "student_t";
    case NoiseFamily::SGalphaS:
      return "sgas";
  }
  return "unknown";
}

}  // namespace

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  while (i + 3 <= bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
    i += 3;
  }
  const std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back('=');
    out.push_back('=');
  } else if (rem == 2) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  int reverse[256];
  for (int i = 0; i < 256; ++i) reverse[i] = -1;
  for (int i = 0; i < 64; ++i) reverse[static_cast<unsigned char>(kB64Alphabet[i])] = i;
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=') break;
    const int v = reverse[static_cast<unsigned char>(c)];
    if (v < 0) throw ConfigError("base64_decode: invalid character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

DatasetSplits generate_datasets(const StateSpaceModel& model, const GaussianBelief& init,
                                const NoiseSpec& noise, int n_train, int n_cv, int n_test, int T,
                                std::uint64_t seed) {
  if (n_train < 1 || n_cv < 1 || n_test < 1)
    throw DomainError("generate_datasets: split sizes must be positive");
  const auto make_split = [&](int count, std::uint64_t split_idx, const char* tag) {
    Dataset d;
    d.model = model;
    d.init = init;
    d.noise = noise;
    d.seed = seed;
    d.split = tag;
    d.trajectories.reserve(count);
    for (int j = 0; j < count; ++j) {
      RandomStream rng =
          RandomStream::derived(seed, {split_idx, static_cast<std::uint64_t>(j)});
      d.trajectories.push_back(simulate(model, init, noise, T, rng));
    }
    return d;
  };
  DatasetSplits splits;
  splits.train = make_split(n_train, 0, "train");
  splits.cv = make_split(n_cv, 1, "cv");
  splits.test = make_split(n_test, 2, "test");
  return splits;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("save_dataset: cannot open " + path);
  json meta;
  meta["split"] = dataset.split;
  meta["seed"] = dataset.seed;
  meta["N"] = dataset.size();
  meta["T"] = dataset.T();
  meta["n"] = dataset.model.n;
  meta["m"] = dataset.model.m;
  meta["model"]["F"] = matrix_to_json(dataset.model.F);
  meta["model"]["H"] = matrix_to_json(dataset.model.H);
  meta["model"]["Q"] = matrix_to_json(dataset.model.Q);
  meta["model"]["init_mean"] = vector_to_json(dataset.init.mean);
  meta["model"]["init_cov"] = matrix_to_json(dataset.init.cov);
  json noise;
  noise["family"] = family_name(dataset.noise.family);
  noise["scale"] = matrix_to_json(dataset.noise.scale);
  switch (dataset.noise.family) {
    case NoiseFamily::GaussianMixture:
      noise["U"] = dataset.noise.gm_factor;
      noise["p_out"] = dataset.noise.gm_p_out;
      break;
    case NoiseFamily::StudentT:
      noise["v"] = dataset.noise.st_dof;
      break;
    case NoiseFamily::SGalphaS:
      noise["alpha"] = dataset.noise.alpha;
      break;
    default:
      break;
  }
  meta["noise"] = std::move(noise);
  out << kHeader << "\n" << meta.dump() << "\n";
  for (const Trajectory& traj : dataset.trajectories) {
    out << base64_encode(doubles_to_bytes(traj.states)) << "\n";
    out << base64_encode(doubles_to_bytes(traj.observations)) << "\n";
  }
  if (!out) throw ConfigError("save_dataset: write failed for " + path);
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("load_dataset: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw ConfigError("load_dataset: bad header in " + path);
  if (!std::getline(in, line)) throw ConfigError("load_dataset: missing metadata in " + path);
  json meta = json::parse(line);

  Dataset d;
  d.split = meta.at("split").get<std::string>();
  d.seed = meta.at("seed").get<std::uint64_t>();
  const int count = meta.at("N").get<int>();
  const int T = meta.at("T").get<int>();
  d.model.n = meta.at("n").get<int>();
  d.model.m = meta.at("m").get<int>();
  d.model.F = matrix_from_json(meta.at("model").at("F"));
  d.model.H = matrix_from_json(meta.at("model").at("H"));
  d.model.Q = matrix_from_json(meta.at("model").at("Q"));
  d.init.mean = vector_from_json(meta.at("model").at("init_mean"));
  d.init.cov = matrix_from_json(meta.at("model").at("init_cov"));
  const json& noise = meta.at("noise");
  const std::string family = noise.at("family").get<std::string>();
  const Matrix scale = matrix_from_json(noise.at("scale"));
  if (family == "gaussian") {
    d.noise = NoiseSpec::gaussian(scale);
  } else if (family == "gm") {
    d.noise = NoiseSpec::gaussian_mixture(scale, noise.at("U").get<double>(),
                                          noise.at("p_out").get<double>());
  } else if (family == "student_t") {
    d.noise = NoiseSpec::student_t(scale, noise.at("v").get<double>());
  } else if (family == "sgas") {
    d.noise = NoiseSpec::sg_alpha_s(scale, noise.at("alpha").get<double>());
  } else {
    throw ConfigError("load_dataset: unknown noise family " + family);
  }

  d.trajectories.reserve(count);
  for (int j = 0; j < count; ++j) {
    Trajectory traj;
    if (!std::getline(in, line)) throw ConfigError("load_dataset: truncated states block");
    traj.states = bytes_to_doubles(base64_decode(line), T, d.model.n);
    if (!std::getline(in, line)) throw ConfigError("load_dataset: truncated observations block");
    traj.observations = bytes_to_doubles(base64_decode(line), T, d.model.m);
    d.trajectories.push_back(std::move(traj));
  }
  return d;
}

std::string noise_label(const NoiseSpec& spec) {
  std::ostringstream out;
  switch (spec.family) {
    case NoiseFamily::Gaussian:
      out << "gaussian";
      break;
    case NoiseFamily::GaussianMixture:
      out << "gm-u" << spec.gm_factor;
      break;
    case NoiseFamily::StudentT:
      out << "st-v" << spec.st_dof;
      break;
    case NoiseFamily::SGalphaS:
      out << "sgas-a" << spec.alpha;
      break;
  }
  return out.str();
}

}  // namespace rkflab
