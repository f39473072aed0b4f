#include "specdec/markov_source.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specdec/error.h"
#include "specdec/rng.h"

namespace specdec {

namespace {

constexpr std::size_t kMaxRows = std::size_t{1} << 22;
constexpr const char* kFormatTag = "specdec-markov-source";

std::vector<std::size_t> make_offsets(int order, int alphabet_size) {
  std::vector<std::size_t> offsets(static_cast<std::size_t>(order) + 2, 0);
  std::size_t power = 1;
  for (int j = 0; j <= order; ++j) {
    offsets[static_cast<std::size_t>(j) + 1] = offsets[static_cast<std::size_t>(j)] + power;
    if (offsets.back() > kMaxRows || power > kMaxRows) {
      throw Error(ErrorCode::kTooLarge, "context table too large");
    }
    power *= static_cast<std::size_t>(alphabet_size);
  }
  return offsets;
}

std::vector<double> dirichlet_row(Rng& rng, int n, double concentration) {
  std::vector<double> g(static_cast<std::size_t>(n));
  double total = 0.0;
  // Very small concentrations can underflow every draw; retry in that case.
  do {
    total = 0.0;
    for (double& v : g) {
      v = rng.gamma(concentration);
      total += v;
    }
  } while (!(total > 0.0));
  return g;
}

}  // namespace

MarkovSource::MarkovSource(int order, int alphabet_size, std::vector<Dist> rows)
    : order_(order), alphabet_size_(alphabet_size), rows_(std::move(rows)) {
  if (order < 0) throw Error(ErrorCode::kBadParam, "order must be >= 0");
  if (alphabet_size < 1) throw Error(ErrorCode::kBadParam, "empty alphabet");
  offsets_ = make_offsets(order, alphabet_size);
  if (rows_.size() != offsets_.back()) {
    throw Error(ErrorCode::kBadParam,
                "expected " + std::to_string(offsets_.back()) + " rows, got " +
                    std::to_string(rows_.size()));
  }
  for (const Dist& d : rows_) {
    if (d.size() != static_cast<std::size_t>(alphabet_size)) {
      throw Error(ErrorCode::kLengthMismatch, "row length differs from alphabet size");
    }
  }
}

std::size_t MarkovSource::context_index(std::span<const Token> ctx) const {
  const std::size_t real = std::min(ctx.size(), static_cast<std::size_t>(order_));
  std::size_t value = 0;
  for (std::size_t i = ctx.size() - real; i < ctx.size(); ++i) {
    const Token t = ctx[i];
    if (t < 0 || t >= alphabet_size_) {
      throw Error(ErrorCode::kBadParam, "token " + std::to_string(t) + " outside alphabet");
    }
    value = value * static_cast<std::size_t>(alphabet_size_) + static_cast<std::size_t>(t);
  }
  return offsets_[real] + value;
}

const Dist& MarkovSource::conditional(std::span<const Token> ctx) const {
  return rows_[context_index(ctx)];
}

const Dist& MarkovSource::conditional(std::span<const Token> ctx,
                                      std::span<const Token> suffix) const {
  const auto m = static_cast<std::size_t>(order_);
  if (suffix.size() >= m) return conditional(suffix);
  Token buf[16];
  std::vector<Token> heap;
  Token* tail = buf;
  if (m > std::size(buf)) {
    heap.resize(m);
    tail = heap.data();
  }
  const std::size_t from_ctx = std::min(ctx.size(), m - suffix.size());
  std::copy(ctx.end() - static_cast<std::ptrdiff_t>(from_ctx), ctx.end(), tail);
  std::copy(suffix.begin(), suffix.end(), tail + from_ctx);
  return conditional(std::span<const Token>(tail, from_ctx + suffix.size()));
}

std::vector<Token> MarkovSource::window(std::size_t index) const {
  if (index >= rows_.size()) throw Error(ErrorCode::kBadParam, "row index out of range");
  std::size_t real = 0;
  while (index >= offsets_[real + 1]) ++real;
  std::size_t value = index - offsets_[real];
  std::vector<Token> w(static_cast<std::size_t>(order_), kStartSymbol);
  for (std::size_t i = 0; i < real; ++i) {
    w[static_cast<std::size_t>(order_) - 1 - i] =
        static_cast<Token>(value % static_cast<std::size_t>(alphabet_size_));
    value /= static_cast<std::size_t>(alphabet_size_);
  }
  return w;
}

std::vector<double> MarkovSource::stationary_row_weights() const {
  std::vector<double> weights(rows_.size(), 0.0);
  if (order_ == 0) {
    weights[0] = 1.0;
    return weights;
  }
  const std::size_t first = offsets_[static_cast<std::size_t>(order_)];
  const std::size_t n = rows_.size() - first;
  const auto a = static_cast<std::size_t>(alphabet_size_);
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  // Lazy chain ½(I + T) has the same stationary law and is aperiodic.
  for (int iter = 0; iter < 200000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      const double w = pi[s];
      if (w == 0.0) continue;
      next[s] += 0.5 * w;
      const std::size_t shifted = (s * a) % n;  // drop the oldest token
      const Dist& row = rows_[first + s];
      for (std::size_t x = 0; x < a; ++x) {
        next[shifted + x] += 0.5 * w * row.mass()[x];
      }
    }
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) change += std::abs(next[s] - pi[s]);
    pi.swap(next);
    if (change < 1e-14) break;
  }
  double total = 0.0;
  for (double v : pi) total += v;
  for (std::size_t s = 0; s < n; ++s) weights[first + s] = pi[s] / total;
  return weights;
}

MarkovSource random_source(std::uint64_t seed, int order, int alphabet_size,
                           double concentration) {
  if (alphabet_size < 2) throw Error(ErrorCode::kBadParam, "alphabet size must be >= 2");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw Error(ErrorCode::kBadParam, "concentration must be positive");
  }
  if (order < 0) throw Error(ErrorCode::kBadParam, "order must be >= 0");
  const std::size_t count = make_offsets(order, alphabet_size).back();
  Rng rng(seed);
  std::vector<Dist> rows;
  rows.reserve(count);
  for (std::size_t r = 0; r < count; ++r) {
    rows.push_back(Dist::normalized(dirichlet_row(rng, alphabet_size, concentration)));
  }
  return MarkovSource(order, alphabet_size, std::move(rows));
}

MarkovSource perturb_draft(const MarkovSource& p_src, double mix, std::uint64_t seed,
                           double concentration) {
  if (!(mix >= 0.0 && mix <= 1.0)) throw Error(ErrorCode::kBadParam, "mix outside [0,1]");
  if (!(concentration > 0.0)) throw Error(ErrorCode::kBadParam, "concentration must be positive");
  Rng rng(seed);
  std::vector<Dist> rows;
  rows.reserve(p_src.row_count());
  for (std::size_t r = 0; r < p_src.row_count(); ++r) {
    const Dist& p = p_src.row(r);
    // Draw even for mix = 0 so that the stream position is independent of mix.
    const Dist noise = Dist::normalized(dirichlet_row(rng, p_src.alphabet_size(), concentration));
    std::vector<double> q(p.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      q[i] = (1.0 - mix) * p.mass()[i] + mix * noise.mass()[i];
    }
    rows.push_back(mix == 0.0 ? p : Dist::normalized(std::move(q)));
  }
  return MarkovSource(p_src.order(), p_src.alphabet_size(), std::move(rows));
}

std::vector<Token> autoregressive_sample(const MarkovSource& src, const Context& ctx,
                                         std::size_t n, Rng& rng) {
  Context running = ctx;
  std::vector<Token> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Token t = rng.categorical(src.conditional(running).mass());
    out.push_back(t);
    running.push_back(t);
  }
  return out;
}

double stationary_kl_bits(const MarkovSource& p, const MarkovSource& q) {
  if (p.order() != q.order() || p.alphabet_size() != q.alphabet_size()) {
    throw Error(ErrorCode::kLengthMismatch, "sources differ in shape");
  }
  const std::vector<double> w = p.stationary_row_weights();
  double kl = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    if (w[r] > 0.0) kl += w[r] * kl_divergence(p.row(r), q.row(r));
  }
  return kl;
}

std::string to_json(const MarkovSource& src) {
  nlohmann::json j;
  j["format"] = kFormatTag;
  j["order"] = src.order();
  j["alphabet_size"] = src.alphabet_size();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < src.row_count(); ++r) {
    const auto m = src.row(r).mass();
    rows.push_back({{"context", src.window(r)},
                    {"p", std::vector<double>(m.begin(), m.end())}});
  }
  j["rows"] = std::move(rows);
  return j.dump(1);
}

MarkovSource source_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
  try {
    if (j.value("format", std::string{}) != kFormatTag) {
      throw Error(ErrorCode::kParse, "missing format tag");
    }
    const int order = j.at("order").get<int>();
    const int alphabet = j.at("alphabet_size").get<int>();
    const std::size_t count = make_offsets(order, alphabet).back();
    std::vector<std::vector<double>> raw(count);
    std::vector<bool> seen(count, false);
    // Index rows through a probe source so the window encoding lives in one place.
    std::vector<Dist> placeholder(count, Dist::uniform(static_cast<std::size_t>(alphabet)));
    const MarkovSource probe(order, alphabet, std::move(placeholder));
    for (const auto& row : j.at("rows")) {
      std::vector<Token> ctx = row.at("context").get<std::vector<Token>>();
      if (ctx.size() != static_cast<std::size_t>(order)) {
        throw Error(ErrorCode::kParse, "context length differs from order");
      }
      std::size_t pad = 0;
      while (pad < ctx.size() && ctx[pad] == kStartSymbol) ++pad;
      const std::span<const Token> real(ctx.data() + pad, ctx.size() - pad);
      const std::size_t idx = probe.context_index(real);
      if (seen[idx]) throw Error(ErrorCode::kParse, "duplicate context row");
      seen[idx] = true;
      raw[idx] = row.at("p").get<std::vector<double>>();
    }
    std::vector<Dist> rows;
    rows.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
      if (!seen[r]) throw Error(ErrorCode::kParse, "missing context row " + std::to_string(r));
      rows.push_back(Dist::normalized(std::move(raw[r])));
    }
    return MarkovSource(order, alphabet, std::move(rows));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

void save_source(const MarkovSource& src, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << to_json(src) << '\n';
}

MarkovSource load_source(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return source_from_json(ss.str());
}

}  // namespace specdec
