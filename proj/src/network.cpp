#include "eosp/network.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numeric>

namespace eosp::nn {

void NetworkConfig::validate() const {
  if (hidden_dim < 1) throw ContractError("NetworkConfig: hidden_dim must be >= 1");
  if (n_layers < 1) throw ContractError("NetworkConfig: n_layers must be >= 1");
  if (n_heads < 1) throw ContractError("NetworkConfig: n_heads must be >= 1");
  if (feature_dim < 1) throw ContractError("NetworkConfig: feature_dim must be >= 1");
}

std::size_t RewiredGraph::count(EdgeType t) const {
  return static_cast<std::size_t>(std::count(type.begin(), type.end(), t));
}

RewiredGraph rewire(const ContinuousObservation& obs) {
  const int n = static_cast<int>(obs.size());
  RewiredGraph g;
  g.original_nodes = n;
  const int pool = n;

  std::vector<std::vector<int>> preds(n), succs(n);
  for (const auto& [from, to] : obs.edges) {
    preds[to].push_back(from);
    succs[from].push_back(to);
  }
  auto by_id = [&](int a, int b) { return obs.node_ids[a] < obs.node_ids[b]; };

  g.in_offsets.reserve(n + 2);
  g.in_offsets.push_back(0);
  auto add = [&](int s, int d, EdgeType t) {
    g.src.push_back(s);
    g.dst.push_back(d);
    g.type.push_back(t);
  };
  for (int d = 0; d < n; ++d) {
    add(d, d, EdgeType::kSelf);
    std::sort(preds[d].begin(), preds[d].end(), by_id);
    for (int s : preds[d]) add(s, d, EdgeType::kPrecedence);
    // A precedence edge d -> s is mirrored as s -> d.
    std::sort(succs[d].begin(), succs[d].end(), by_id);
    for (int s : succs[d]) add(s, d, EdgeType::kReversePrecedence);
    add(pool, d, EdgeType::kPool);
    g.in_offsets.push_back(g.edges());
  }
  add(pool, pool, EdgeType::kSelf);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), by_id);
  for (int s : order) add(s, pool, EdgeType::kPool);
  g.in_offsets.push_back(g.edges());

  g.features = Matrix<double>::Zero(kFeatureDim, n + 1);
  for (int i = 0; i < n; ++i) {
    const auto values = obs.features[i].values();
    for (int r = 0; r < kFeatureDim; ++r) g.features(r, i) = values[r];
  }
  return g;
}

template <typename T>
std::size_t ParameterSet<T>::parameter_count() const {
  std::size_t total = 0;
  visit([&](const std::string&, const Matrix<T>& m) { total += static_cast<std::size_t>(m.size()); });
  return total;
}

template <typename T>
std::vector<T> ParameterSet<T>::flatten() const {
  std::vector<T> out;
  out.reserve(parameter_count());
  visit([&](const std::string&, const Matrix<T>& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(m(r, c));
    }
  });
  return out;
}

template <typename T>
void ParameterSet<T>::assign(std::span<const T> flat) {
  if (flat.size() != parameter_count()) throw ContractError("ParameterSet::assign: size mismatch");
  std::size_t i = 0;
  visit([&](const std::string&, Matrix<T>& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = flat[i++];
    }
  });
}

template <typename T>
bool ParameterSet<T>::all_finite() const {
  bool ok = true;
  visit([&](const std::string&, const Matrix<T>& m) { ok = ok && m.allFinite(); });
  return ok;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::zeros(const NetworkConfig& config) {
  config.validate();
  const int H = config.hidden_dim, K = config.n_heads, L = config.n_layers, F = config.feature_dim;
  ParameterSet p;
  p.config = config;
  p.embed_w1 = Matrix<T>::Zero(H, F);
  p.embed_b1 = Matrix<T>::Zero(H, 1);
  p.embed_w2 = Matrix<T>::Zero(H, H);
  p.embed_b2 = Matrix<T>::Zero(H, 1);
  p.edge_embedding = Matrix<T>::Zero(H, kEdgeTypes);
  p.layers.resize(L);
  for (auto& layer : p.layers) {
    layer.attn_proj = Matrix<T>::Zero(K * H, 3 * H);
    layer.attn_bias = Matrix<T>::Zero(K * H, 1);
    layer.attn_vec = Matrix<T>::Zero(H, K);
    layer.value_proj = Matrix<T>::Zero(K * H, H);
    layer.node_w1 = Matrix<T>::Zero(H, K * H);
    layer.node_b1 = Matrix<T>::Zero(H, 1);
    layer.node_w2 = Matrix<T>::Zero(H, H);
    layer.node_b2 = Matrix<T>::Zero(H, 1);
    layer.edge_w1 = Matrix<T>::Zero(H, K * H);
    layer.edge_b1 = Matrix<T>::Zero(H, 1);
    layer.edge_w2 = Matrix<T>::Zero(H, H);
    layer.edge_b2 = Matrix<T>::Zero(H, 1);
  }
  p.actor_weight = Matrix<T>::Zero(1, 2 * (L + 1) * H);
  p.actor_bias = Matrix<T>::Zero(1, 1);
  p.critic_weight = Matrix<T>::Zero(1, (L + 1) * H);
  p.critic_bias = Matrix<T>::Zero(1, 1);
  return p;
}

template <typename T>
ParameterSet<T> init_parameters(const NetworkConfig& config, std::uint64_t seed) {
  auto p = ParameterSet<T>::zeros(config);
  Rng rng(seed);
  auto glorot = [&](Matrix<T>& m, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = static_cast<T>(rng.uniform(-bound, bound));
    }
  };
  const int H = config.hidden_dim, K = config.n_heads, F = config.feature_dim;
  glorot(p.embed_w1, F, H);
  glorot(p.embed_w2, H, H);
  glorot(p.edge_embedding, kEdgeTypes, H);
  for (auto& layer : p.layers) {
    glorot(layer.attn_proj, 3 * H, H);
    glorot(layer.attn_vec, H, 1);
    glorot(layer.value_proj, H, H);
    glorot(layer.node_w1, K * H, H);
    glorot(layer.node_w2, H, H);
    glorot(layer.edge_w1, K * H, H);
    glorot(layer.edge_w2, H, H);
  }
  glorot(p.actor_weight, static_cast<int>(p.actor_weight.cols()), 1);
  glorot(p.critic_weight, static_cast<int>(p.critic_weight.cols()), 1);
  return p;
}

namespace {

template <typename T>
T leaky(T x, T slope) {
  return x > T(0) ? x : slope * x;
}

template <typename T>
void require_finite(const Matrix<T>& m, int layer, const char* what) {
  if (!m.allFinite()) {
    throw NumericError("layer " + std::to_string(layer) + ": non-finite " + what);
  }
}

}  // namespace

template <typename T>
void layer_forward(const RewiredGraph& graph, const LayerParams<T>& p, const NetworkConfig& config,
                   const Matrix<T>& h, const Matrix<T>& f, Matrix<T>& h_out, Matrix<T>& f_out,
                   LayerCache<T>* cache, int layer_index) {
  const int H = config.hidden_dim, K = config.n_heads;
  const int N = graph.nodes(), E = graph.edges();
  const T slope = static_cast<T>(config.leaky_slope);

  const Matrix<T> from_src = p.attn_proj.leftCols(H) * h;
  const Matrix<T> from_dst = p.attn_proj.rightCols(H) * h;
  Matrix<T> messages = p.attn_proj.middleCols(H, H) * f;
  for (int e = 0; e < E; ++e) {
    messages.col(e) += from_src.col(graph.src[e]) + from_dst.col(graph.dst[e]) + p.attn_bias;
  }
  const Matrix<T> activated = messages.unaryExpr([slope](T x) { return leaky(x, slope); });

  Matrix<T> alpha(K, E);
  for (int k = 0; k < K; ++k) {
    alpha.row(k) = p.attn_vec.col(k).transpose() * activated.middleRows(k * H, H);
  }
  for (int d = 0; d < N; ++d) {
    const int begin = graph.in_offsets[d], count = graph.in_offsets[d + 1] - begin;
    for (int k = 0; k < K; ++k) {
      auto scores = alpha.row(k).segment(begin, count);
      const T top = scores.maxCoeff();
      scores = (scores.array() - top).exp().matrix();
      scores /= scores.sum();
    }
  }

  const Matrix<T> values = p.value_proj * h;
  Matrix<T> heads = Matrix<T>::Zero(K * H, N);
  for (int e = 0; e < E; ++e) {
    const int s = graph.src[e], d = graph.dst[e];
    for (int k = 0; k < K; ++k) {
      heads.block(k * H, d, H, 1).noalias() += alpha(k, e) * values.block(k * H, s, H, 1);
    }
  }

  Matrix<T> node_hidden = ((p.node_w1 * heads).colwise() + p.node_b1.col(0)).array().tanh().matrix();
  h_out = h + ((p.node_w2 * node_hidden).colwise() + p.node_b2.col(0));
  Matrix<T> edge_hidden = ((p.edge_w1 * messages).colwise() + p.edge_b1.col(0)).array().tanh().matrix();
  f_out = f + ((p.edge_w2 * edge_hidden).colwise() + p.edge_b2.col(0));

  require_finite(h_out, layer_index, "node states");
  require_finite(f_out, layer_index, "edge states");

  if (cache) {
    cache->messages = std::move(messages);
    cache->alpha = std::move(alpha);
    cache->values = values;
    cache->heads = std::move(heads);
    cache->node_hidden = std::move(node_hidden);
    cache->edge_hidden = std::move(edge_hidden);
  }
}

template <typename T>
ForwardOutput<T> forward(const RewiredGraph& graph, const ParameterSet<T>& params) {
  const auto& config = params.config;
  if (graph.original_nodes < 1) throw ContractError("forward: observation has no nodes");
  if (graph.features.rows() != config.feature_dim) throw ContractError("forward: feature width mismatch");
  const int H = config.hidden_dim, L = config.n_layers;
  const int n = graph.original_nodes, pool = graph.pool(), E = graph.edges();

  ForwardOutput<T> out;
  auto& trace = out.trace;
  trace.features = graph.features.cast<T>();
  trace.embed_hidden =
      ((params.embed_w1 * trace.features).colwise() + params.embed_b1.col(0)).array().tanh().matrix();
  Matrix<T> h0 = (params.embed_w2 * trace.embed_hidden).colwise() + params.embed_b2.col(0);
  Matrix<T> f0(H, E);
  for (int e = 0; e < E; ++e) f0.col(e) = params.edge_embedding.col(static_cast<int>(graph.type[e]));
  require_finite(h0, -1, "node embeddings");

  trace.node_states.reserve(L + 1);
  trace.edge_states.reserve(L + 1);
  trace.node_states.push_back(std::move(h0));
  trace.edge_states.push_back(std::move(f0));
  trace.layers.resize(L);
  for (int l = 0; l < L; ++l) {
    Matrix<T> h_next, f_next;
    layer_forward(graph, params.layers[l], config, trace.node_states[l], trace.edge_states[l], h_next, f_next,
                  &trace.layers[l], l);
    trace.node_states.push_back(std::move(h_next));
    trace.edge_states.push_back(std::move(f_next));
  }

  // logit_i = w_node . [h_i^0 .. h_i^L] + w_pool . [g^0 .. g^L] + b
  const int block = (L + 1) * H;
  Vector<T> logits = Vector<T>::Constant(n, params.actor_bias(0, 0));
  T pooled = T(0);
  T value = params.critic_bias(0, 0);
  for (int l = 0; l <= L; ++l) {
    const auto& states = trace.node_states[l];
    logits.noalias() += (params.actor_weight.middleCols(l * H, H) * states.leftCols(n)).transpose();
    pooled += (params.actor_weight.middleCols(block + l * H, H) * states.col(pool))(0, 0);
    value += (params.critic_weight.middleCols(l * H, H) * states.col(pool))(0, 0);
  }
  logits.array() += pooled;
  if (!logits.allFinite() || !std::isfinite(static_cast<double>(value))) {
    throw NumericError("readout: non-finite logits or value");
  }
  out.logits = std::move(logits);
  out.value = value;
  return out;
}

template <typename T>
void backward(const RewiredGraph& graph, const ParameterSet<T>& params, const ForwardTrace<T>& trace,
              const Vector<T>& d_logits, T d_value, ParameterSet<T>& grads) {
  const auto& config = params.config;
  const int H = config.hidden_dim, K = config.n_heads, L = config.n_layers;
  const int n = graph.original_nodes, pool = graph.pool(), N = graph.nodes(), E = graph.edges();
  const int block = (L + 1) * H;
  const T slope = static_cast<T>(config.leaky_slope);
  const T logit_sum = d_logits.sum();

  // Readout.
  std::vector<Matrix<T>> d_nodes(L + 1);
  for (int l = 0; l <= L; ++l) {
    const auto& states = trace.node_states[l];
    Matrix<T>& dh = d_nodes[l];
    dh = params.actor_weight.middleCols(l * H, H).transpose() * d_logits.transpose();
    dh.conservativeResize(H, N);
    dh.col(pool) = logit_sum * params.actor_weight.middleCols(block + l * H, H).transpose() +
                   d_value * params.critic_weight.middleCols(l * H, H).transpose();
    grads.actor_weight.middleCols(l * H, H) += (states.leftCols(n) * d_logits).transpose();
    grads.actor_weight.middleCols(block + l * H, H) += logit_sum * states.col(pool).transpose();
    grads.critic_weight.middleCols(l * H, H) += d_value * states.col(pool).transpose();
  }
  grads.actor_bias(0, 0) += logit_sum;
  grads.critic_bias(0, 0) += d_value;

  Matrix<T> d_edges = Matrix<T>::Zero(H, E);
  for (int l = L - 1; l >= 0; --l) {
    const auto& p = params.layers[l];
    auto& g = grads.layers[l];
    const auto& c = trace.layers[l];
    const auto& h = trace.node_states[l];
    const auto& f = trace.edge_states[l];
    const Matrix<T>& dh_out = d_nodes[l + 1];

    // Node feed-forward.
    g.node_b2 += dh_out.rowwise().sum();
    g.node_w2 += dh_out * c.node_hidden.transpose();
    const Matrix<T> dz_node =
        ((p.node_w2.transpose() * dh_out).array() * (T(1) - c.node_hidden.array().square())).matrix();
    g.node_w1 += dz_node * c.heads.transpose();
    g.node_b1 += dz_node.rowwise().sum();
    const Matrix<T> d_heads = p.node_w1.transpose() * dz_node;

    // Edge feed-forward.
    g.edge_b2 += d_edges.rowwise().sum();
    g.edge_w2 += d_edges * c.edge_hidden.transpose();
    const Matrix<T> dz_edge =
        ((p.edge_w2.transpose() * d_edges).array() * (T(1) - c.edge_hidden.array().square())).matrix();
    g.edge_w1 += dz_edge * c.messages.transpose();
    g.edge_b1 += dz_edge.rowwise().sum();
    Matrix<T> d_messages = p.edge_w1.transpose() * dz_edge;

    // Attention-weighted aggregation.
    Matrix<T> d_values = Matrix<T>::Zero(K * H, N);
    Matrix<T> d_alpha(K, E);
    for (int e = 0; e < E; ++e) {
      const int s = graph.src[e], d = graph.dst[e];
      for (int k = 0; k < K; ++k) {
        d_values.col(s).segment(k * H, H) += c.alpha(k, e) * d_heads.col(d).segment(k * H, H);
        d_alpha(k, e) = d_heads.col(d).segment(k * H, H).dot(c.values.col(s).segment(k * H, H));
      }
    }
    Matrix<T> d_scores(K, E);
    for (int d = 0; d < N; ++d) {
      const int begin = graph.in_offsets[d], count = graph.in_offsets[d + 1] - begin;
      for (int k = 0; k < K; ++k) {
        const auto a = c.alpha.row(k).segment(begin, count);
        const auto da = d_alpha.row(k).segment(begin, count);
        const T weighted = a.dot(da);
        d_scores.row(k).segment(begin, count) = (a.array() * (da.array() - weighted)).matrix();
      }
    }

    // Scores through the LeakyReLU.
    const Matrix<T> activated = c.messages.unaryExpr([slope](T x) { return leaky(x, slope); });
    const Matrix<T> slope_mask = c.messages.unaryExpr([slope](T x) { return x > T(0) ? T(1) : slope; });
    for (int k = 0; k < K; ++k) {
      g.attn_vec.col(k) += activated.middleRows(k * H, H) * d_scores.row(k).transpose();
      d_messages.middleRows(k * H, H) += (p.attn_vec.col(k) * d_scores.row(k)).cwiseProduct(
          slope_mask.middleRows(k * H, H));
    }

    // Messages.
    g.attn_bias += d_messages.rowwise().sum();
    Matrix<T> d_from_src = Matrix<T>::Zero(K * H, N);
    Matrix<T> d_from_dst = Matrix<T>::Zero(K * H, N);
    for (int e = 0; e < E; ++e) {
      d_from_src.col(graph.src[e]) += d_messages.col(e);
      d_from_dst.col(graph.dst[e]) += d_messages.col(e);
    }
    g.attn_proj.leftCols(H) += d_from_src * h.transpose();
    g.attn_proj.rightCols(H) += d_from_dst * h.transpose();
    g.attn_proj.middleCols(H, H) += d_messages * f.transpose();
    g.value_proj += d_values * h.transpose();

    Matrix<T>& dh = d_nodes[l];
    dh += dh_out;
    dh.noalias() += p.attn_proj.leftCols(H).transpose() * d_from_src;
    dh.noalias() += p.attn_proj.rightCols(H).transpose() * d_from_dst;
    dh.noalias() += p.value_proj.transpose() * d_values;
    Matrix<T> d_edges_in = d_edges;
    d_edges_in.noalias() += p.attn_proj.middleCols(H, H).transpose() * d_messages;
    d_edges = std::move(d_edges_in);
  }

  // Embeddings.
  for (int e = 0; e < E; ++e) grads.edge_embedding.col(static_cast<int>(graph.type[e])) += d_edges.col(e);
  const Matrix<T>& dh0 = d_nodes[0];
  grads.embed_b2 += dh0.rowwise().sum();
  grads.embed_w2 += dh0 * trace.embed_hidden.transpose();
  const Matrix<T> dz =
      ((params.embed_w2.transpose() * dh0).array() * (T(1) - trace.embed_hidden.array().square())).matrix();
  grads.embed_w1 += dz * trace.features.transpose();
  grads.embed_b1 += dz.rowwise().sum();
}

template <typename T>
void check_finite_gradients(const ParameterSet<T>& grads) {
  grads.visit([](const std::string& name, const Matrix<T>& m) {
    if (!m.allFinite()) throw NumericError("non-finite gradient for parameter '" + name + "'");
  });
}

std::vector<double> masked_log_softmax(std::span<const double> logits, std::span<const char> mask) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  double top = neg_inf;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) top = std::max(top, logits[i]);
  }
  if (top == neg_inf) throw ContractError("masked_log_softmax: no feasible action");
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) total += std::exp(logits[i] - top);
  }
  const double log_total = top + std::log(total);
  std::vector<double> out(logits.size(), neg_inf);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) out[i] = logits[i] - log_total;
  }
  return out;
}

ActionChoice sample_action(std::span<const double> logits, std::span<const char> mask, SampleMode mode,
                           Rng& rng) {
  if (logits.size() != mask.size()) throw ContractError("sample_action: logits and mask sizes differ");
  const auto log_probs = masked_log_softmax(logits, mask);
  ActionChoice choice;
  if (mode == SampleMode::kArgmax) {
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (mask[i] && (choice.position < 0 || logits[i] > logits[choice.position])) {
        choice.position = static_cast<int>(i);
      }
    }
  } else {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
      if (!mask[i]) continue;
      choice.position = static_cast<int>(i);
      cumulative += std::exp(log_probs[i]);
      if (u < cumulative) break;
    }
  }
  choice.log_prob = log_probs[choice.position];
  return choice;
}

#define EOSP_INSTANTIATE(T)                                                                              \
  template struct ParameterSet<T>;                                                                       \
  template ParameterSet<T> init_parameters<T>(const NetworkConfig&, std::uint64_t);                      \
  template void layer_forward<T>(const RewiredGraph&, const LayerParams<T>&, const NetworkConfig&,       \
                                 const Matrix<T>&, const Matrix<T>&, Matrix<T>&, Matrix<T>&,             \
                                 LayerCache<T>*, int);                                                   \
  template ForwardOutput<T> forward<T>(const RewiredGraph&, const ParameterSet<T>&);                     \
  template void backward<T>(const RewiredGraph&, const ParameterSet<T>&, const ForwardTrace<T>&,         \
                            const Vector<T>&, T, ParameterSet<T>&);                                      \
  template void check_finite_gradients<T>(const ParameterSet<T>&);

EOSP_INSTANTIATE(float)
EOSP_INSTANTIATE(double)

#undef EOSP_INSTANTIATE

}  // namespace eosp::nn
