#include "nadv/models.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace nadv {

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

struct ForwardCache {
  std::vector<Matrix> inputs;  // input of each layer
  std::vector<Matrix> pre;     // pre-activation of each layer
  Vector score;
};

ForwardCache forward(const MlpModel& m, const Matrix& X) {
  ForwardCache cache;
  Matrix h = X;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    Matrix z = h * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    cache.inputs.push_back(std::move(h));
    if (l + 1 < m.layers.size()) h = z.cwiseMax(0.0);
    cache.pre.push_back(std::move(z));
  }
  const Matrix& logits = cache.pre.back();
  cache.score = logits.col(1) - logits.col(0);
  return cache;
}

// Walks the layers backwards; param_grad may be null when only input
// gradients are wanted.
Matrix backward(const MlpModel& m, const ForwardCache& cache, const Vector& upstream, Vector* param_grad) {
  Matrix dz(upstream.size(), 2);
  dz.col(0) = -upstream;
  dz.col(1) = upstream;
  std::vector<Matrix> dW(m.layers.size());
  std::vector<Vector> db(m.layers.size());
  for (std::size_t l = m.layers.size(); l-- > 0;) {
    if (param_grad) {
      dW[l] = dz.transpose() * cache.inputs[l];
      db[l] = dz.colwise().sum().transpose();
    }
    Matrix dh = dz * m.layers[l].weights;
    if (l == 0) {
      if (param_grad) {
        Index total = 0;
        for (const auto& layer : m.layers) total += layer.weights.size() + layer.bias.size();
        param_grad->resize(total);
        Index offset = 0;
        for (std::size_t j = 0; j < m.layers.size(); ++j) {
          param_grad->segment(offset, dW[j].size()) = Eigen::Map<const Vector>(dW[j].data(), dW[j].size());
          offset += dW[j].size();
          param_grad->segment(offset, db[j].size()) = db[j];
          offset += db[j].size();
        }
      }
      return dh;
    }
    // ReLU subgradient at 0 is 0.
    dz = dh.array() * (cache.pre[l - 1].array() > 0.0).cast<double>();
  }
  return {};
}

}  // namespace

double Objective::value(double score) const {
  switch (kind) {
    case Kind::score:
      return score;
    case Kind::cross_entropy:
      return target > 0.5 ? softplus(-score) : softplus(score);
    case Kind::squared_score_error:
      return (score - target) * (score - target);
  }
  return 0.0;
}

double Objective::derivative(double score) const {
  switch (kind) {
    case Kind::score:
      return 1.0;
    case Kind::cross_entropy:
      return sigmoid(score) - target;
    case Kind::squared_score_error:
      return 2.0 * (score - target);
  }
  return 0.0;
}

MlpModel MlpModel::zeros(const std::vector<Index>& sizes) {
  require(sizes.size() >= 2 && sizes.back() == 2, "MLP needs at least input and a 2-unit output layer");
  MlpModel m;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l)
    m.layers.push_back({Matrix::Zero(sizes[l + 1], sizes[l]), Vector::Zero(sizes[l + 1])});
  return m;
}

std::vector<Index> MlpModel::sizes() const {
  std::vector<Index> out;
  if (layers.empty()) return out;
  out.push_back(layers.front().weights.cols());
  for (const auto& layer : layers) out.push_back(layer.weights.rows());
  return out;
}

void MlpModel::validate() const {
  require(!layers.empty(), "MLP has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].bias.size() == layers[l].weights.rows(), "bias size mismatch in layer " + std::to_string(l));
    if (l > 0)
      require(layers[l].weights.cols() == layers[l - 1].weights.rows(),
              "layer " + std::to_string(l) + " input does not match previous output");
  }
  require(layers.back().weights.rows() == 2, "MLP must have exactly two output logits");
}

ScoringModel::ScoringModel(LinearModel model) : model_(std::move(model)) {}

ScoringModel::ScoringModel(MlpModel model) : model_(std::move(model)) { mlp().validate(); }

Index ScoringModel::input_dim() const {
  if (is_linear()) return linear().weights.size();
  return mlp().layers.front().weights.cols();
}

void ScoringModel::check_dim(Index k) const {
  if (k != input_dim())
    throw ContractError("input dimension " + std::to_string(k) + " does not match model dimension " +
                        std::to_string(input_dim()));
}

double ScoringModel::score(const Vector& x) const {
  check_dim(x.size());
  if (is_linear()) return linear().weights.dot(x) + linear().bias;
  const auto& m = mlp();
  Vector h = x;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    Vector z = m.layers[l].weights * h + m.layers[l].bias;
    h = l + 1 < m.layers.size() ? Vector(z.cwiseMax(0.0)) : z;
  }
  return h[1] - h[0];
}

Prediction ScoringModel::predict(const Vector& x) const {
  Prediction p;
  p.score = score(x);
  p.probability = sigmoid(p.score);
  p.label = p.score > 0.0 ? 1 : 0;
  return p;
}

Vector ScoringModel::scores(const Matrix& X) const {
  check_dim(X.cols());
  if (is_linear()) return (X * linear().weights).array() + linear().bias;
  return forward(mlp(), X).score;
}

Vector ScoringModel::input_gradient(const Vector& x, const Objective& objective) const {
  check_dim(x.size());
  if (is_linear()) return objective.derivative(score(x)) * linear().weights;
  const Matrix row = x.transpose();
  const auto cache = forward(mlp(), row);
  Vector upstream(1);
  upstream[0] = objective.derivative(cache.score[0]);
  return backward(mlp(), cache, upstream, nullptr).row(0).transpose();
}

Vector ScoringModel::parameter_gradient(const Matrix& X, const Vector& upstream) const {
  check_dim(X.cols());
  require(upstream.size() == X.rows(), "upstream size mismatch");
  if (is_linear()) {
    Vector g(X.cols() + 1);
    g.head(X.cols()) = X.transpose() * upstream;
    g[X.cols()] = upstream.sum();
    return g;
  }
  Vector g;
  backward(mlp(), forward(mlp(), X), upstream, &g);
  return g;
}

Matrix ScoringModel::input_gradients(const Matrix& X, const Vector& upstream) const {
  check_dim(X.cols());
  require(upstream.size() == X.rows(), "upstream size mismatch");
  if (is_linear()) return upstream * linear().weights.transpose();
  return backward(mlp(), forward(mlp(), X), upstream, nullptr);
}

Index ScoringModel::parameter_count() const {
  if (is_linear()) return linear().weights.size() + 1;
  Index total = 0;
  for (const auto& layer : mlp().layers) total += layer.weights.size() + layer.bias.size();
  return total;
}

Vector ScoringModel::parameters() const {
  Vector flat(parameter_count());
  if (is_linear()) {
    flat.head(linear().weights.size()) = linear().weights;
    flat[linear().weights.size()] = linear().bias;
    return flat;
  }
  Index offset = 0;
  for (const auto& layer : mlp().layers) {
    flat.segment(offset, layer.weights.size()) = Eigen::Map<const Vector>(layer.weights.data(), layer.weights.size());
    offset += layer.weights.size();
    flat.segment(offset, layer.bias.size()) = layer.bias;
    offset += layer.bias.size();
  }
  return flat;
}

void ScoringModel::set_parameters(const Vector& flat) {
  require(flat.size() == parameter_count(), "parameter vector has wrong size");
  if (is_linear()) {
    auto& m = std::get<LinearModel>(model_);
    m.weights = flat.head(m.weights.size());
    m.bias = flat[m.weights.size()];
    return;
  }
  Index offset = 0;
  for (auto& layer : std::get<MlpModel>(model_).layers) {
    Eigen::Map<Vector>(layer.weights.data(), layer.weights.size()) = flat.segment(offset, layer.weights.size());
    offset += layer.weights.size();
    layer.bias = flat.segment(offset, layer.bias.size());
    offset += layer.bias.size();
  }
}

// ---------------------------------------------------------------------------

OlsFit fit_ols(const Matrix& X, const Vector& y) {
  require(X.rows() == y.size(), "fit_ols: X and y row counts differ");
  require(X.rows() >= 1 && X.cols() >= 1, "fit_ols: empty design matrix");
  const Index n = X.rows();
  const Index k = X.cols();

  Matrix gram = X.transpose() * X;
  OlsFit fit;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || !(lmin > 0.0) || lmax / lmin > 1e12) {
    gram.diagonal().array() += 1e-8;
    fit.ridge_applied = true;
  }
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericalError("fit_ols: X^T X is not positive definite after ridge");
  fit.beta_hat = llt.solve(X.transpose() * y);
  if (!fit.beta_hat.allFinite()) throw NumericalError("fit_ols: non-finite coefficients");

  const Vector residual = y - X * fit.beta_hat;
  const double dof = n > k ? static_cast<double>(n - k) : 1.0;
  fit.residual_variance = residual.squaredNorm() / dof;
  const Vector col_ss = X.colwise().squaredNorm().transpose();
  fit.standard_errors = (fit.residual_variance / col_ss.array()).sqrt();
  return fit;
}

// ---------------------------------------------------------------------------

namespace {

constexpr const char* kModelMagic = "nadv-model";
constexpr int kModelVersion = 1;

std::string format_values(const double* data, Index count) {
  std::string out;
  char buf[40];
  for (Index i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

std::vector<double> parse_values(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::vector<double> out;
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') throw ParseError("model key '" + key + "': bad number '" + token + "'", 0);
    out.push_back(v);
  }
  return out;
}

}  // namespace

std::string serialize_model(const ScoringModel& model) {
  std::ostringstream out;
  out << "# " << kModelMagic << " v" << kModelVersion << "\n";
  out << "format_version = " << kModelVersion << "\n";
  if (model.is_linear()) {
    const auto& m = model.linear();
    out << "kind = linear_logistic\n";
    out << "input_dim = " << m.weights.size() << "\n";
    out << "weights = " << format_values(m.weights.data(), m.weights.size()) << "\n";
    out << "bias = " << format_values(&m.bias, 1) << "\n";
    return out.str();
  }
  const auto& m = model.mlp();
  out << "kind = mlp\n";
  out << "layer_sizes =";
  for (Index s : m.sizes()) out << ' ' << s;
  out << "\n";
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    // Row-major so that each line reads like the printed matrix.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> w = m.layers[l].weights;
    out << "layer." << l << ".weights = " << format_values(w.data(), w.size()) << "\n";
    out << "layer." << l << ".bias = " << format_values(m.layers[l].bias.data(), m.layers[l].bias.size()) << "\n";
  }
  return out.str();
}

ScoringModel deserialize_model(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      header = line.rfind(std::string("# ") + kModelMagic, 0) == 0;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("model line " + std::to_string(line_no) + " has no '='", line_no);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  if (!header) throw ParseError("not a nadv model file", 1);
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError("model file missing key '" + key + "'", 0);
    return it->second;
  };
  if (get("format_version") != std::to_string(kModelVersion))
    throw ParseError("unsupported model format_version " + get("format_version"), 0);

  const auto& kind = get("kind");
  if (kind == "linear_logistic") {
    const auto weights = parse_values(get("weights"), "weights");
    const auto bias = parse_values(get("bias"), "bias");
    if (bias.size() != 1) throw ParseError("model bias must be a single value", 0);
    if (static_cast<Index>(weights.size()) != static_cast<Index>(std::stoll(get("input_dim"))))
      throw ParseError("model weights do not match input_dim", 0);
    LinearModel m;
    m.weights = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
    m.bias = bias[0];
    return ScoringModel(std::move(m));
  }
  if (kind == "mlp") {
    std::vector<Index> sizes;
    for (double v : parse_values(get("layer_sizes"), "layer_sizes")) sizes.push_back(static_cast<Index>(v));
    MlpModel m = MlpModel::zeros(sizes);
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
      const auto prefix = "layer." + std::to_string(l);
      const auto w = parse_values(get(prefix + ".weights"), prefix + ".weights");
      const auto b = parse_values(get(prefix + ".bias"), prefix + ".bias");
      auto& layer = m.layers[l];
      if (static_cast<Index>(w.size()) != layer.weights.size() || static_cast<Index>(b.size()) != layer.bias.size())
        throw ParseError("layer " + std::to_string(l) + " size does not match layer_sizes", 0);
      layer.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          w.data(), layer.weights.rows(), layer.weights.cols());
      layer.bias = Eigen::Map<const Vector>(b.data(), layer.bias.size());
    }
    return ScoringModel(std::move(m));
  }
  throw ParseError("unknown model kind '" + kind + "'", 0);
}

void save_model(const ScoringModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file '" + path + "'");
  out << serialize_model(model);
}

ScoringModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open model file '" + path + "'", 0);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace nadv
