#include "mcc/inference.hpp"

#include <atomic>
#include <cmath>
#include <optional>
#include <thread>

#include "mcc/rng.hpp"
#include "mcc/special.hpp"

namespace mcc {
namespace {

// Per-cell constants of the expected log-likelihood (log x! for Poisson, the
// log multinomial coefficient) are dropped from the responsibility updates:
// they are constant across every (v, g) and k, so they cancel exactly in the
// normalization. Their total reappears as a constant in the ELBO data term
// (PreparedFamily::cell_constant).

// Random near-hard assignments. Flat starts leave every view's blocks close
// to the global marginal, and coordinate ascent then collapses all mass onto
// one view and one object cluster before any structure can form; smoothed
// one-hot rows give each restart distinct initial blocks that compete.
Matrix smoothed_onehot_rows(Index rows, Index cols, Rng& rng) {
  constexpr double kSmoothing = 0.02;
  Matrix out(rows, cols);
  if (cols == 1) {
    out.setOnes();
    return out;
  }
  out.setConstant(kSmoothing / static_cast<double>(cols - 1));
  for (Index i = 0; i < rows; ++i)
    out(i, static_cast<Index>(rng.bounded(static_cast<std::uint64_t>(cols)))) =
        1.0 - kSmoothing;
  return out;
}

// E[log pi_t] for one truncated stick set: psi(a_t) - psi(a_t+b_t) plus the
// accumulated log remainder of earlier sticks.
Array stick_log_weights(const Array& a, const Array& b) {
  const Index T = a.size();
  Array out(T);
  double remainder = 0.0;
  for (Index t = 0; t < T; ++t) {
    const double psi_ab = digamma(a[t] + b[t]);
    out[t] = digamma(a[t]) - psi_ab + remainder;
    remainder += digamma(b[t]) - psi_ab;
  }
  return out;
}

void stick_update(const Array& mass, double concentration, Array& a, Array& b) {
  const Index T = mass.size();
  a.resize(T);
  b.resize(T);
  double tail = 0.0;
  for (Index t = T - 1; t >= 0; --t) {
    a[t] = 1.0 + mass[t];
    b[t] = concentration + tail;
    tail += mass[t];
  }
}

FamilyBlocks allocate_blocks(const FeatureFamily& family, int V, int G, int K) {
  switch (family.kind) {
    case FamilyKind::Gaussian: {
      GaussianBlocks b;
      b.mu.assign(V, ArrayXX::Zero(G, K));
      b.lambda.assign(V, ArrayXX::Zero(G, K));
      b.gamma.assign(V, ArrayXX::Zero(G, K));
      b.sigma_sq.assign(V, ArrayXX::Zero(G, K));
      return b;
    }
    case FamilyKind::Poisson: {
      PoissonBlocks b;
      b.alpha.assign(V, ArrayXX::Zero(G, K));
      b.beta.assign(V, ArrayXX::Zero(G, K));
      return b;
    }
    default: {
      DirichletBlocks b;
      b.rho.assign(V, std::vector<ArrayXX>(family.num_categories, ArrayXX::Zero(G, K)));
      return b;
    }
  }
}

struct BlockStats {
  Matrix w;                    // G x K, sum of tau*eta over observed cells
  Matrix s1;                   // weighted values (Gaussian, Poisson)
  Matrix s2;                   // weighted squares (Gaussian)
  std::vector<Matrix> counts;  // weighted per-category counts
};

BlockStats block_stats(const PreparedFamily& fam, const Matrix& tau_v, const Matrix& eta_v) {
  BlockStats stats;
  stats.w = (fam.mask * tau_v).transpose() * eta_v;
  switch (fam.family.kind) {
    case FamilyKind::Gaussian:
      stats.s1 = (fam.x * tau_v).transpose() * eta_v;
      stats.s2 = (fam.xsq * tau_v).transpose() * eta_v;
      break;
    case FamilyKind::Poisson:
      stats.s1 = (fam.x * tau_v).transpose() * eta_v;
      break;
    default:
      stats.counts.reserve(fam.cat.size());
      for (const Matrix& c : fam.cat)
        stats.counts.push_back((c * tau_v).transpose() * eta_v);
      break;
  }
  return stats;
}

// Gaussian E[log p] is A*x^2 + B*x + C per block; the other families have
// analogous linear forms in their per-cell statistics.
struct GaussianCoefs {
  ArrayXX a, b, c;
};

GaussianCoefs gaussian_coefs(const GaussianBlocks& blocks, int v) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  const ArrayXX& mu = blocks.mu[v];
  const ArrayXX& lambda = blocks.lambda[v];
  const ArrayXX& gamma = blocks.gamma[v];
  const ArrayXX& sigma_sq = blocks.sigma_sq[v];
  GaussianCoefs coefs;
  coefs.a = -0.5 / sigma_sq;
  coefs.b = mu / sigma_sq;
  const ArrayXX half_gamma = 0.5 * gamma;
  coefs.c = -0.5 * (mu.square() / sigma_sq + 1.0 / lambda + sigma_sq.log() +
                    half_gamma.log() - digamma(half_gamma) + kLog2Pi);
  return coefs;
}

// Sum over observed cells and k of eta * E[log p], as a G x d matrix
// (feature-side E-step), dropping per-cell constants.
Matrix feature_loglik(const PreparedFamily& fam, const FamilyBlocks& blocks,
                      const Matrix& eta_v, int v) {
  if (const auto* g = std::get_if<GaussianBlocks>(&blocks)) {
    const GaussianCoefs coefs = gaussian_coefs(*g, v);
    const Matrix p0 = eta_v.transpose() * fam.mask;
    const Matrix p1 = eta_v.transpose() * fam.x;
    const Matrix p2 = eta_v.transpose() * fam.xsq;
    return coefs.a.matrix() * p2 + coefs.b.matrix() * p1 + coefs.c.matrix() * p0;
  }
  if (const auto* p = std::get_if<PoissonBlocks>(&blocks)) {
    const ArrayXX log_rate = digamma(p->alpha[v]) - p->beta[v].log();
    const ArrayXX rate = p->alpha[v] / p->beta[v];
    const Matrix p0 = eta_v.transpose() * fam.mask;
    const Matrix p1 = eta_v.transpose() * fam.x;
    return log_rate.matrix() * p1 - rate.matrix() * p0;
  }
  const auto& d = std::get<DirichletBlocks>(blocks);
  ArrayXX rho_sum = ArrayXX::Zero(d.rho[v][0].rows(), d.rho[v][0].cols());
  for (const ArrayXX& rho_h : d.rho[v]) rho_sum += rho_h;
  // digamma(rho_sum) multiplies each cell's total count, not its observation
  // indicator; the two coincide only for categorical cells.
  Matrix out = -(digamma(rho_sum).matrix() * (eta_v.transpose() * fam.cat_total));
  for (std::size_t h = 0; h < d.rho[v].size(); ++h)
    out += digamma(d.rho[v][h]).matrix() * (eta_v.transpose() * fam.cat[h]);
  return out;
}

// Sum over observed cells and g of tau * E[log p], as an n x K matrix
// (object-side E-step), dropping per-cell constants.
Matrix object_loglik(const PreparedFamily& fam, const FamilyBlocks& blocks,
                     const Matrix& tau_v, int v) {
  if (const auto* g = std::get_if<GaussianBlocks>(&blocks)) {
    const GaussianCoefs coefs = gaussian_coefs(*g, v);
    return (fam.xsq * tau_v) * coefs.a.matrix() + (fam.x * tau_v) * coefs.b.matrix() +
           (fam.mask * tau_v) * coefs.c.matrix();
  }
  if (const auto* p = std::get_if<PoissonBlocks>(&blocks)) {
    const ArrayXX log_rate = digamma(p->alpha[v]) - p->beta[v].log();
    const ArrayXX rate = p->alpha[v] / p->beta[v];
    return (fam.x * tau_v) * log_rate.matrix() - (fam.mask * tau_v) * rate.matrix();
  }
  const auto& d = std::get<DirichletBlocks>(blocks);
  ArrayXX rho_sum = ArrayXX::Zero(d.rho[v][0].rows(), d.rho[v][0].cols());
  for (const ArrayXX& rho_h : d.rho[v]) rho_sum += rho_h;
  // Same total-count weighting of digamma(rho_sum) as on the feature side.
  Matrix out = -((fam.cat_total * tau_v) * digamma(rho_sum).matrix());
  for (std::size_t h = 0; h < d.rho[v].size(); ++h)
    out += (fam.cat[h] * tau_v) * digamma(d.rho[v][h]).matrix();
  return out;
}

void normalize_log_rows(Matrix& logp) {
  for (Index i = 0; i < logp.rows(); ++i) {
    const double shift = logp.row(i).maxCoeff();
    logp.row(i) = (logp.row(i).array() - shift).exp();
    logp.row(i) /= logp.row(i).sum();
  }
}

double entropy(const Matrix& p) {
  return -((p.array() > 0.0).select(p.array() * p.array().log(), 0.0)).sum();
}

bool responsibilities_finite(const VariationalState& state) {
  for (const Matrix& tau : state.tau)
    if (!tau.allFinite()) return false;
  for (const Matrix& eta : state.eta)
    if (!eta.allFinite()) return false;
  return true;
}

// The same sufficient statistics feed both the block-posterior update and the
// ELBO data term, so fit_single computes them once per iteration.
using FamilyViewStats = std::vector<std::vector<BlockStats>>;

FamilyViewStats all_block_stats(const VariationalState& state, const PreparedData& data) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  FamilyViewStats all(data.families.size());
  for (std::size_t m = 0; m < data.families.size(); ++m) {
    all[m].reserve(V);
    for (int v = 0; v < V; ++v)
      all[m].push_back(block_stats(data.families[m],
                                   state.tau[m].middleCols(static_cast<Index>(v) * G, G),
                                   state.eta[v]));
  }
  return all;
}

void update_blocks_from(VariationalState& state, const PreparedData& data,
                        const TruncationConfig& config, const FamilyViewStats& all);
ElboTerms elbo_terms_from(const VariationalState& state, const PreparedData& data,
                          const TruncationConfig& config, const FamilyViewStats& all);

}  // namespace

ModelMode model_mode(const TruncationConfig& config) {
  if (config.views == 1) return ModelMode::CoClustering;
  if (config.feature_clusters == 1) return ModelMode::Restricted;
  return ModelMode::Full;
}

const char* mode_name(ModelMode mode) {
  switch (mode) {
    case ModelMode::Full: return "full";
    case ModelMode::CoClustering: return "coclustering";
    case ModelMode::Restricted: return "restricted";
  }
  return "unknown";
}

PreparedData::PreparedData(const Dataset& dataset)
    : object_ids(dataset.object_ids), n(dataset.n_objects()) {
  families.reserve(dataset.families.size());
  for (const FamilyData& fam : dataset.families) {
    PreparedFamily prep;
    prep.family = fam.family;
    prep.feature_names = fam.feature_names;
    prep.mask = fam.observed;
    switch (fam.family.kind) {
      case FamilyKind::Gaussian:
        // Derived statistics come from the masked values so that whatever a
        // masked cell holds can never reach any computation.
        prep.x = fam.values.cwiseProduct(prep.mask);
        prep.xsq = prep.x.array().square().matrix();
        break;
      case FamilyKind::Poisson:
        prep.x = fam.values.cwiseProduct(prep.mask);
        prep.logfact = prep.x.unaryExpr([](double x) { return log_factorial(x); })
                           .cwiseProduct(prep.mask);
        break;
      case FamilyKind::Categorical: {
        prep.cat.assign(fam.family.num_categories, Matrix::Zero(fam.rows(), fam.cols()));
        for (Index j = 0; j < fam.cols(); ++j)
          for (Index i = 0; i < fam.rows(); ++i)
            if (fam.is_observed(i, j))
              prep.cat[static_cast<int>(fam.values(i, j))](i, j) = 1.0;
        prep.cat_total = prep.mask;
        break;
      }
      case FamilyKind::Multinomial: {
        prep.cat.reserve(fam.counts.size());
        for (const Matrix& c : fam.counts) prep.cat.push_back(c.cwiseProduct(prep.mask));
        prep.cat_total = Matrix::Zero(fam.rows(), fam.cols());
        for (const Matrix& c : prep.cat) prep.cat_total += c;
        prep.logcoef = Matrix::Zero(fam.rows(), fam.cols());
        Vector cell(fam.family.num_categories);
        for (Index j = 0; j < fam.cols(); ++j)
          for (Index i = 0; i < fam.rows(); ++i) {
            if (!fam.is_observed(i, j)) continue;
            for (int h = 0; h < fam.family.num_categories; ++h)
              cell[h] = fam.counts[h](i, j);
            prep.logcoef(i, j) = log_multinomial_coef(cell);
          }
        break;
      }
    }
    total_features += fam.cols();
    families.push_back(std::move(prep));
  }
}

VariationalState init_state(const PreparedData& data, const TruncationConfig& config,
                            std::uint64_t seed) {
  Rng rng(seed);
  const int V = config.views, G = config.feature_clusters, K = config.object_clusters;
  VariationalState state;
  state.tau.reserve(data.families.size());
  for (const PreparedFamily& fam : data.families)
    state.tau.push_back(smoothed_onehot_rows(fam.cols(), static_cast<Index>(V) * G, rng));
  state.eta.reserve(V);
  for (int v = 0; v < V; ++v) state.eta.push_back(smoothed_onehot_rows(data.n, K, rng));

  state.view_sticks.a = Array::Ones(V);
  state.view_sticks.b = Array::Ones(V);
  state.feature_stick_a.assign(data.families.size(), ArrayXX::Ones(G, V));
  state.feature_stick_b.assign(data.families.size(), ArrayXX::Ones(G, V));
  state.object_stick_a = ArrayXX::Ones(K, V);
  state.object_stick_b = ArrayXX::Ones(K, V);
  state.blocks.reserve(data.families.size());
  for (const PreparedFamily& fam : data.families)
    state.blocks.push_back(allocate_blocks(fam.family, V, G, K));

  update_block_posteriors(state, data, config);
  update_view_sticks(state, config);
  update_feature_sticks(state, config);
  update_object_sticks(state, config);
  return state;
}

namespace {

void update_blocks_from(VariationalState& state, const PreparedData& data,
                        const TruncationConfig& config, const FamilyViewStats& all) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  const int K = state.num_object_clusters();
  for (std::size_t m = 0; m < data.families.size(); ++m) {
    const PreparedFamily& fam = data.families[m];
    for (int v = 0; v < V; ++v) {
      const BlockStats& stats = all[m][v];
      for (int g = 0; g < G; ++g)
        for (int k = 0; k < K; ++k) {
          WeightedSuffStats cell;
          cell.weight_sum = stats.w(g, k);
          switch (fam.family.kind) {
            case FamilyKind::Gaussian: {
              cell.weighted_sum = stats.s1(g, k);
              cell.weighted_sq_sum = stats.s2(g, k);
              const NormalGamma post = gaussian_update(cell, config.gaussian_prior);
              auto& blocks = std::get<GaussianBlocks>(state.blocks[m]);
              blocks.mu[v](g, k) = post.mu;
              blocks.lambda[v](g, k) = post.lambda;
              blocks.gamma[v](g, k) = post.gamma;
              blocks.sigma_sq[v](g, k) = post.sigma_sq;
              break;
            }
            case FamilyKind::Poisson: {
              cell.weighted_sum = stats.s1(g, k);
              const GammaPosterior post = poisson_update(cell, config.poisson_prior);
              auto& blocks = std::get<PoissonBlocks>(state.blocks[m]);
              blocks.alpha[v](g, k) = post.alpha;
              blocks.beta[v](g, k) = post.beta;
              break;
            }
            default: {
              const int H = fam.family.num_categories;
              cell.weighted_counts.resize(H);
              for (int h = 0; h < H; ++h) cell.weighted_counts[h] = stats.counts[h](g, k);
              const DirichletPosterior post =
                  categorical_update(cell, config.dirichlet_prior_mass, H);
              auto& blocks = std::get<DirichletBlocks>(state.blocks[m]);
              for (int h = 0; h < H; ++h) blocks.rho[v][h](g, k) = post.rho[h];
              break;
            }
          }
        }
    }
  }
}

}  // namespace

void update_block_posteriors(VariationalState& state, const PreparedData& data,
                             const TruncationConfig& config) {
  update_blocks_from(state, data, config, all_block_stats(state, data));
}

void update_view_sticks(VariationalState& state, const TruncationConfig& config) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  Array mass = Array::Zero(V);
  for (const Matrix& tau : state.tau) {
    const Vector column_mass = tau.colwise().sum();
    for (int v = 0; v < V; ++v)
      mass[v] += column_mass.segment(static_cast<Index>(v) * G, G).sum();
  }
  stick_update(mass, config.alpha1, state.view_sticks.a, state.view_sticks.b);
}

void update_feature_sticks(VariationalState& state, const TruncationConfig& config) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  for (std::size_t m = 0; m < state.tau.size(); ++m) {
    const Vector column_mass = state.tau[m].colwise().sum();
    for (int v = 0; v < V; ++v) {
      const Array mass = column_mass.segment(static_cast<Index>(v) * G, G).array();
      Array a, b;
      stick_update(mass, config.alpha2, a, b);
      state.feature_stick_a[m].col(v) = a;
      state.feature_stick_b[m].col(v) = b;
    }
  }
}

void update_object_sticks(VariationalState& state, const TruncationConfig& config) {
  const int V = state.num_views();
  for (int v = 0; v < V; ++v) {
    const Array mass = state.eta[v].colwise().sum().array();
    Array a, b;
    stick_update(mass, config.beta, a, b);
    state.object_stick_a.col(v) = a;
    state.object_stick_b.col(v) = b;
  }
}

void update_feature_responsibilities(VariationalState& state, const PreparedData& data) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  const Array view_term = stick_log_weights(state.view_sticks.a, state.view_sticks.b);
  for (std::size_t m = 0; m < data.families.size(); ++m) {
    Matrix log_tau(data.families[m].cols(), static_cast<Index>(V) * G);
    for (int v = 0; v < V; ++v) {
      const Array cluster_term = stick_log_weights(state.feature_stick_a[m].col(v),
                                                   state.feature_stick_b[m].col(v));
      const Matrix loglik =
          feature_loglik(data.families[m], state.blocks[m], state.eta[v], v);
      for (int g = 0; g < G; ++g)
        log_tau.col(static_cast<Index>(v) * G + g) =
            loglik.row(g).transpose().array() + view_term[v] + cluster_term[g];
    }
    normalize_log_rows(log_tau);
    state.tau[m] = std::move(log_tau);
  }
}

void update_object_responsibilities(VariationalState& state, const PreparedData& data) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  const int K = state.num_object_clusters();
  for (int v = 0; v < V; ++v) {
    const Array cluster_term =
        stick_log_weights(state.object_stick_a.col(v), state.object_stick_b.col(v));
    Matrix log_eta = Matrix::Zero(data.n, K);
    for (std::size_t m = 0; m < data.families.size(); ++m)
      log_eta += object_loglik(data.families[m], state.blocks[m],
                               state.tau[m].middleCols(static_cast<Index>(v) * G, G), v);
    log_eta.rowwise() += cluster_term.matrix().transpose();
    normalize_log_rows(log_eta);
    state.eta[v] = std::move(log_eta);
  }
}

namespace {

ElboTerms elbo_terms_from(const VariationalState& state, const PreparedData& data,
                          const TruncationConfig& config, const FamilyViewStats& all) {
  const int V = state.num_views(), G = state.num_feature_clusters();
  const int K = state.num_object_clusters();
  ElboTerms terms;

  const Array view_term = stick_log_weights(state.view_sticks.a, state.view_sticks.b);
  for (int v = 0; v < V; ++v)
    terms.kl_view_sticks +=
        kl_beta(state.view_sticks.a[v], state.view_sticks.b[v], 1.0, config.alpha1);
  for (int v = 0; v < V; ++v)
    for (int k = 0; k < K; ++k)
      terms.kl_object_sticks += kl_beta(state.object_stick_a(k, v),
                                        state.object_stick_b(k, v), 1.0, config.beta);

  for (std::size_t m = 0; m < data.families.size(); ++m) {
    const PreparedFamily& fam = data.families[m];
    const Vector column_mass = state.tau[m].colwise().sum();
    for (int v = 0; v < V; ++v) {
      const Array cluster_term = stick_log_weights(state.feature_stick_a[m].col(v),
                                                   state.feature_stick_b[m].col(v));
      for (int g = 0; g < G; ++g) {
        terms.feature_prior += column_mass[static_cast<Index>(v) * G + g] *
                               (view_term[v] + cluster_term[g]);
        terms.kl_feature_sticks += kl_beta(state.feature_stick_a[m](g, v),
                                           state.feature_stick_b[m](g, v), 1.0,
                                           config.alpha2);
      }

      const BlockStats& stats = all[m][v];
      switch (fam.family.kind) {
        case FamilyKind::Gaussian: {
          const auto& blocks = std::get<GaussianBlocks>(state.blocks[m]);
          const GaussianCoefs coefs = gaussian_coefs(blocks, v);
          terms.data += (coefs.a * stats.s2.array() + coefs.b * stats.s1.array() +
                         coefs.c * stats.w.array())
                            .sum();
          for (int g = 0; g < G; ++g)
            for (int k = 0; k < K; ++k)
              terms.kl_blocks += kl_normal_gamma(
                  {blocks.mu[v](g, k), blocks.lambda[v](g, k), blocks.gamma[v](g, k),
                   blocks.sigma_sq[v](g, k)},
                  config.gaussian_prior);
          break;
        }
        case FamilyKind::Poisson: {
          const auto& blocks = std::get<PoissonBlocks>(state.blocks[m]);
          const ArrayXX log_rate = digamma(blocks.alpha[v]) - blocks.beta[v].log();
          const ArrayXX rate = blocks.alpha[v] / blocks.beta[v];
          terms.data += (log_rate * stats.s1.array() - rate * stats.w.array()).sum();
          for (int g = 0; g < G; ++g)
            for (int k = 0; k < K; ++k)
              terms.kl_blocks +=
                  kl_gamma({blocks.alpha[v](g, k), blocks.beta[v](g, k)},
                           config.poisson_prior);
          break;
        }
        default: {
          const auto& blocks = std::get<DirichletBlocks>(state.blocks[m]);
          const int H = fam.family.num_categories;
          ArrayXX rho_sum = ArrayXX::Zero(G, K);
          ArrayXX count_mass = ArrayXX::Zero(G, K);
          for (int h = 0; h < H; ++h) {
            rho_sum += blocks.rho[v][h];
            count_mass += stats.counts[h].array();
          }
          terms.data -= (digamma(rho_sum) * count_mass).sum();
          for (int h = 0; h < H; ++h)
            terms.data += (digamma(blocks.rho[v][h]) * stats.counts[h].array()).sum();
          Vector rho_cell(H);
          for (int g = 0; g < G; ++g)
            for (int k = 0; k < K; ++k) {
              for (int h = 0; h < H; ++h) rho_cell[h] = blocks.rho[v][h](g, k);
              terms.kl_blocks += kl_dirichlet(DirichletPosterior{rho_cell},
                                              config.dirichlet_prior_mass);
            }
          break;
        }
      }
    }
    // Per-cell constants dropped from the E-step contributions: responsibilities
    // sum to one, so their data-term weight is exactly 1 per observed cell.
    if (fam.family.kind == FamilyKind::Poisson) terms.data -= fam.logfact.sum();
    if (fam.family.kind == FamilyKind::Multinomial) terms.data += fam.logcoef.sum();
    terms.feature_entropy += entropy(state.tau[m]);
  }

  for (int v = 0; v < V; ++v) {
    const Array cluster_term =
        stick_log_weights(state.object_stick_a.col(v), state.object_stick_b.col(v));
    terms.object_prior += (state.eta[v].colwise().sum().array() * cluster_term.transpose()).sum();
    terms.object_entropy += entropy(state.eta[v]);
  }
  return terms;
}

}  // namespace

ElboTerms elbo_terms(const VariationalState& state, const PreparedData& data,
                     const TruncationConfig& config) {
  return elbo_terms_from(state, data, config, all_block_stats(state, data));
}

double compute_elbo(const VariationalState& state, const PreparedData& data,
                    const TruncationConfig& config) {
  return elbo_terms(state, data, config).total();
}

NonFiniteError::NonFiniteError(int iteration, std::uint64_t seed)
    : std::runtime_error("responsibilities became non-finite at iteration " +
                         std::to_string(iteration) + " (seed " + std::to_string(seed) +
                         ")"),
      iteration_(iteration),
      seed_(seed) {}

Assignments map_assignments(const VariationalState& state) {
  const int G = state.num_feature_clusters();
  Assignments out;
  out.features.resize(state.tau.size());
  for (std::size_t m = 0; m < state.tau.size(); ++m) {
    const Matrix& tau = state.tau[m];
    out.features[m].resize(tau.rows());
    for (Index j = 0; j < tau.rows(); ++j) {
      Index best = 0;
      for (Index c = 1; c < tau.cols(); ++c)
        if (tau(j, c) > tau(j, best)) best = c;
      out.features[m][j] = {static_cast<int>(best / G), static_cast<int>(best % G)};
    }
  }
  out.objects.resize(state.eta.size());
  for (std::size_t v = 0; v < state.eta.size(); ++v) {
    const Matrix& eta = state.eta[v];
    out.objects[v].resize(eta.rows());
    for (Index i = 0; i < eta.rows(); ++i) {
      Index best = 0;
      for (Index k = 1; k < eta.cols(); ++k)
        if (eta(i, k) > eta(i, best)) best = k;
      out.objects[v][i] = static_cast<int>(best);
    }
  }
  return out;
}

ClusteringResult fit_single(const PreparedData& data, const TruncationConfig& config,
                            std::uint64_t seed, const FitOptions& options) {
  VariationalState state = init_state(data, config, seed);
  ClusteringResult result;
  result.seed = seed;
  double previous = 0.0;
  FamilyViewStats stats = all_block_stats(state, data);
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    update_blocks_from(state, data, config, stats);
    update_view_sticks(state, config);
    update_feature_sticks(state, config);
    update_object_sticks(state, config);
    update_feature_responsibilities(state, data);
    update_object_responsibilities(state, data);
    if (!responsibilities_finite(state)) throw NonFiniteError(iter, seed);
    stats = all_block_stats(state, data);
    const double elbo = elbo_terms_from(state, data, config, stats).total();
    if (!std::isfinite(elbo)) throw NonFiniteError(iter, seed);
    result.elbo_trace.push_back(elbo);
    result.iterations = iter;
    const bool converged =
        iter >= 2 && std::abs(elbo - previous) <= options.tol * (1.0 + std::abs(elbo));
    previous = elbo;
    if (converged) break;
  }
  result.elbo = result.elbo_trace.back();
  result.assignments = map_assignments(state);

  std::vector<bool> view_used(state.num_views(), false);
  for (const auto& fam : result.assignments.features)
    for (const FeatureAssignment& a : fam) view_used[a.view] = true;
  for (bool used : view_used) result.active_views += used ? 1 : 0;
  result.active_object_clusters.reserve(result.assignments.objects.size());
  for (const auto& labels : result.assignments.objects) {
    std::vector<bool> seen(state.num_object_clusters(), false);
    int distinct = 0;
    for (int k : labels)
      if (!seen[k]) {
        seen[k] = true;
        ++distinct;
      }
    result.active_object_clusters.push_back(distinct);
  }
  return result;
}

ClusteringResult fit_single(const Dataset& dataset, const TruncationConfig& config,
                            std::uint64_t seed, const FitOptions& options) {
  return fit_single(PreparedData(dataset), config, seed, options);
}

ClusteringResult fit(const Dataset& dataset, const TruncationConfig& config,
                     const FitOptions& options) {
  if (options.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
  const PreparedData data(dataset);
  const int S = options.restarts;
  std::vector<std::optional<ClusteringResult>> results(S);
  std::vector<std::string> failures(S);

  int threads = options.threads;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, S);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int s = next.fetch_add(1);
      if (s >= S) return;
      try {
        results[s] = fit_single(data, config, options.base_seed + s, options);
      } catch (const std::exception& e) {
        failures[s] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  int best = -1;
  for (int s = 0; s < S; ++s) {
    if (!results[s]) continue;
    if (best < 0 || results[s]->elbo > results[best]->elbo) best = s;
  }
  if (best < 0) {
    std::string message = "all " + std::to_string(S) + " restarts failed:";
    int listed = 0;
    for (int s = 0; s < S && listed < 5; ++s, ++listed)
      message += " [seed " + std::to_string(options.base_seed + s) + "] " + failures[s] + ";";
    throw FitError(message);
  }
  return std::move(*results[best]);
}

}  // namespace mcc
