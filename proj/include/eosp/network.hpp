#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eosp/continuous_graph.hpp"
#include "eosp/random.hpp"

namespace eosp::nn {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Non-finite activation or gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct NetworkConfig {
  int hidden_dim = 32;
  int n_layers = 4;
  int n_heads = 4;
  double leaky_slope = 0.2;
  int feature_dim = kFeatureDim;

  // Sizes used for the published experiments.
  static NetworkConfig paper_scale() { return {64, 10, 4, 0.2, kFeatureDim}; }

  void validate() const;
  // Width of the per-node actor input, 2 (L + 1) H.
  int actor_input_dim() const { return 2 * (n_layers + 1) * hidden_dim; }

  bool operator==(const NetworkConfig&) const = default;
};

enum class EdgeType : int { kPrecedence = 0, kReversePrecedence = 1, kPool = 2, kSelf = 3 };
inline constexpr int kEdgeTypes = 4;

// Continuous graph plus reverse edges, a pooling node (last index) linked
// both ways to every node, and a self-loop on every node. Edges are grouped
// by destination (CSR) in an order that does not depend on node positions.
struct RewiredGraph {
  int original_nodes = 0;
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<EdgeType> type;
  std::vector<int> in_offsets;   // size nodes() + 1
  Matrix<double> features;       // feature_dim x nodes(), pooling column zero

  int nodes() const { return original_nodes + 1; }
  int pool() const { return original_nodes; }
  int edges() const { return static_cast<int>(src.size()); }
  std::size_t count(EdgeType t) const;
};

RewiredGraph rewire(const ContinuousObservation& obs);

template <typename T>
struct LayerParams {
  Matrix<T> attn_proj;   // K*H x 3H; head k maps [h_src | f | h_dst] to a message
  Matrix<T> attn_bias;   // K*H x 1
  Matrix<T> attn_vec;    // H x K; column k scores head k
  Matrix<T> value_proj;  // K*H x H
  Matrix<T> node_w1, node_b1, node_w2, node_b2;  // K*H -> H -> H
  Matrix<T> edge_w1, edge_b1, edge_w2, edge_b2;  // K*H -> H -> H
};

// Every learnable array of the actor-critic network.
template <typename T>
struct ParameterSet {
  NetworkConfig config;
  Matrix<T> embed_w1, embed_b1, embed_w2, embed_b2;  // feature_dim -> H -> H
  Matrix<T> edge_embedding;                          // H x kEdgeTypes
  std::vector<LayerParams<T>> layers;
  Matrix<T> actor_weight, actor_bias;    // 1 x 2(L+1)H, 1 x 1
  Matrix<T> critic_weight, critic_bias;  // 1 x (L+1)H, 1 x 1

  // Calls f(name, matrix) on every array in a fixed order.
  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }

  std::size_t parameter_count() const;
  std::vector<T> flatten() const;
  void assign(std::span<const T> flat);
  bool all_finite() const;

  // Same shapes, every entry zero.
  static ParameterSet zeros(const NetworkConfig& config);

  template <typename U>
  ParameterSet<U> cast() const;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    f("embed.w1", self.embed_w1);
    f("embed.b1", self.embed_b1);
    f("embed.w2", self.embed_w2);
    f("embed.b2", self.embed_b2);
    f("edge_embedding", self.edge_embedding);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& p = self.layers[l];
      const std::string prefix = "layers." + std::to_string(l) + ".";
      f(prefix + "attn_proj", p.attn_proj);
      f(prefix + "attn_bias", p.attn_bias);
      f(prefix + "attn_vec", p.attn_vec);
      f(prefix + "value_proj", p.value_proj);
      f(prefix + "node_ffn.w1", p.node_w1);
      f(prefix + "node_ffn.b1", p.node_b1);
      f(prefix + "node_ffn.w2", p.node_w2);
      f(prefix + "node_ffn.b2", p.node_b2);
      f(prefix + "edge_ffn.w1", p.edge_w1);
      f(prefix + "edge_ffn.b1", p.edge_b1);
      f(prefix + "edge_ffn.w2", p.edge_w2);
      f(prefix + "edge_ffn.b2", p.edge_b2);
    }
    f("actor.weight", self.actor_weight);
    f("actor.bias", self.actor_bias);
    f("critic.weight", self.critic_weight);
    f("critic.bias", self.critic_bias);
  }
};

// Glorot-uniform matrices, zero biases.
template <typename T>
ParameterSet<T> init_parameters(const NetworkConfig& config, std::uint64_t seed);

template <typename T>
struct LayerCache {
  Matrix<T> messages;     // K*H x E, pre-activation
  Matrix<T> alpha;        // K x E
  Matrix<T> values;       // K*H x N
  Matrix<T> heads;        // K*H x N
  Matrix<T> node_hidden;  // H x N
  Matrix<T> edge_hidden;  // H x E
};

template <typename T>
struct ForwardTrace {
  Matrix<T> features;
  Matrix<T> embed_hidden;
  std::vector<Matrix<T>> node_states;  // L + 1 entries, H x N
  std::vector<Matrix<T>> edge_states;  // L + 1 entries, H x E
  std::vector<LayerCache<T>> layers;
};

template <typename T>
struct ForwardOutput {
  Vector<T> logits;  // one per original node
  T value{};
  ForwardTrace<T> trace;
};

// One edge-featured attention layer with residual node and edge updates.
// Throws NumericError naming the layer on non-finite outputs.
template <typename T>
void layer_forward(const RewiredGraph& graph, const LayerParams<T>& params, const NetworkConfig& config,
                   const Matrix<T>& h, const Matrix<T>& f, Matrix<T>& h_out, Matrix<T>& f_out,
                   LayerCache<T>* cache, int layer_index = 0);

template <typename T>
ForwardOutput<T> forward(const RewiredGraph& graph, const ParameterSet<T>& params);

template <typename T>
ForwardOutput<T> forward(const ContinuousObservation& obs, const ParameterSet<T>& params) {
  return forward(rewire(obs), params);
}

// Accumulates into `grads` the reverse-mode derivatives of a scalar loss
// whose partials w.r.t. the logits and the value are given.
template <typename T>
void backward(const RewiredGraph& graph, const ParameterSet<T>& params, const ForwardTrace<T>& trace,
              const Vector<T>& d_logits, T d_value, ParameterSet<T>& grads);

// Throws NumericError naming the first parameter with a non-finite gradient.
template <typename T>
void check_finite_gradients(const ParameterSet<T>& grads);

enum class SampleMode { kSample, kArgmax };

struct ActionChoice {
  int position = -1;  // index into the observation's nodes
  double log_prob = 0.0;
};

// Log-softmax restricted to masked-in entries; masked-out entries are -inf.
std::vector<double> masked_log_softmax(std::span<const double> logits, std::span<const char> mask);

// Masked categorical draw, or argmax with lowest-index tie-break.
// Throws ContractError when nothing is feasible.
ActionChoice sample_action(std::span<const double> logits, std::span<const char> mask, SampleMode mode,
                           Rng& rng);

template <typename T>
std::vector<double> to_doubles(const Vector<T>& v) {
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
  return out;
}

template <typename T>
template <typename U>
ParameterSet<U> ParameterSet<T>::cast() const {
  ParameterSet<U> out = ParameterSet<U>::zeros(config);
  std::vector<const Matrix<T>*> src;
  visit([&](const std::string&, const Matrix<T>& m) { src.push_back(&m); });
  std::size_t i = 0;
  out.visit([&](const std::string&, Matrix<U>& m) { m = src[i++]->template cast<U>(); });
  return out;
}

}  // namespace eosp::nn
