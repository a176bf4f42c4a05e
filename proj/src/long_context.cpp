#include "longcode/long_context.hpp"

#include <algorithm>
#include <string>

#include "longcode/error.hpp"

namespace longcode {
namespace {

void check_window(std::size_t seg_len, std::size_t stride) {
  if (seg_len == 0) throw ConfigError("seg_len must be >= 1");
  if (stride >= seg_len) {
    throw ConfigError("seg_stride (" + std::to_string(stride) + ") must be smaller than seg_len (" +
                      std::to_string(seg_len) + ")");
  }
}

// Windows of `plan` carry `window_len` content tokens; the encoder sees
// `lead` extra tokens before and `trail` after them.
template <typename T>
Tensor<T> encode_windows(const TransformerEncoder<T>& encoder, std::span<const TokenId> ids,
                         std::size_t length, const SegmentPlan& plan,
                         const std::optional<SpecialTokens>& special) {
  const std::size_t lead = special ? 1 : 0;
  const std::size_t seg_len = encoder.config().seg_len;
  if (plan.seg_len + 2 * lead != seg_len) {
    throw ShapeError("segment plan of length " + std::to_string(plan.seg_len) +
                     " does not fit encoder seg_len " + std::to_string(seg_len));
  }
  if (length > plan.padded_length()) {
    throw ShapeError("segment plan covers " + std::to_string(plan.padded_length()) +
                     " positions, sequence has " + std::to_string(length) + " tokens");
  }
  if (length == 0) throw ShapeError("cannot encode an empty sequence");

  // Which windows own at least one real token; the rest contribute nothing.
  std::vector<bool> used(plan.segments.size(), false);
  for (std::size_t i = 0; i < length; ++i) used[plan.owner[i]] = true;

  std::vector<Tensor<T>> outputs;
  std::vector<std::size_t> row_base(plan.segments.size(), 0);
  std::vector<TokenId> window(seg_len);
  std::vector<bool> mask(seg_len);
  for (std::size_t w = 0; w < plan.segments.size(); ++w) {
    if (!used[w]) continue;
    const Segment seg = plan.segments[w];
    for (std::size_t j = 0; j < seg_len; ++j) {
      mask[j] = false;
      if (special && j == 0) {
        window[j] = special->cls;
      } else if (special && j == seg_len - 1) {
        window[j] = special->sep;
      } else {
        const std::size_t pos = seg.begin + j - lead;
        const bool real = pos < length;
        window[j] = real ? ids[pos] : TokenId{0};
        mask[j] = !real;
      }
    }
    row_base[w] = outputs.size() * seg_len;
    outputs.push_back(encoder.encode_segment(window, mask));
  }

  std::vector<std::size_t> rows(length);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t w = plan.owner[i];
    rows[i] = row_base[w] + lead + (i - plan.segments[w].begin);
  }
  const Tensor<T> all = outputs.size() == 1 ? outputs[0] : concat_rows(outputs);
  return gather_rows(all, rows);
}

}  // namespace

std::size_t padded_length(std::size_t length, std::size_t seg_len, std::size_t stride) {
  check_window(seg_len, stride);
  if (stride == 0) return segment_count(length, seg_len) * seg_len;
  if (length <= seg_len) return seg_len;
  const std::size_t step = seg_len - stride;
  return seg_len + (length - seg_len + step - 1) / step * step;
}

SegmentPlan plan_segments(std::size_t padded_len, std::size_t seg_len, std::size_t stride) {
  check_window(seg_len, stride);
  if (padded_len < seg_len) {
    throw ConfigError("padded length " + std::to_string(padded_len) + " is shorter than seg_len " +
                      std::to_string(seg_len));
  }
  if (stride == 0 && padded_len % seg_len != 0) {
    throw ConfigError("padded length " + std::to_string(padded_len) +
                      " is not a multiple of seg_len " + std::to_string(seg_len));
  }
  SegmentPlan plan;
  plan.seg_len = seg_len;
  plan.stride = stride;
  const std::size_t step = seg_len - stride;
  for (std::size_t start = 0;;) {
    plan.segments.push_back({start, start + seg_len});
    if (start + seg_len >= padded_len) break;
    start = std::min(start + step, padded_len - seg_len);
  }

  plan.owner.assign(padded_len, 0);
  std::size_t first = 0;  // earliest window that can still contain the position
  for (std::size_t p = 0; p < padded_len; ++p) {
    while (plan.segments[first].end <= p) ++first;
    std::size_t best = first;
    std::size_t best_dist = static_cast<std::size_t>(-1);
    for (std::size_t w = first; w < plan.segments.size() && plan.segments[w].begin <= p; ++w) {
      const std::size_t twice_center = plan.segments[w].begin + plan.segments[w].end;
      const std::size_t dist = 2 * p > twice_center ? 2 * p - twice_center : twice_center - 2 * p;
      if (dist < best_dist) {
        best = w;
        best_dist = dist;
      }
    }
    plan.owner[p] = best;
  }
  return plan;
}

template <typename T>
Tensor<T> encode_long(const TransformerEncoder<T>& encoder, const TokenSequence& seq,
                      const SegmentPlan& plan) {
  if (seq.length > seq.ids.size()) {
    throw ShapeError("token sequence length " + std::to_string(seq.length) + " exceeds its " +
                     std::to_string(seq.ids.size()) + " ids");
  }
  return encode_windows(encoder, std::span<const TokenId>(seq.ids).first(seq.length), seq.length,
                        plan, std::nullopt);
}

template <typename T>
SegmentedTransformer<T>::SegmentedTransformer(TransformerEncoder<T> encoder, std::size_t stride,
                                              std::optional<SpecialTokens> special)
    : encoder_(std::move(encoder)), stride_(stride), special_(special) {
  const std::size_t seg_len = encoder_.config().seg_len;
  if (special_ && seg_len < 3) {
    throw ConfigError("seg_len must be >= 3 when segments carry [CLS]/[SEP]");
  }
  check_window(special_ ? seg_len - 2 : seg_len, stride_);
}

template <typename T>
Tensor<T> SegmentedTransformer<T>::encode(std::span<const TokenId> ids) const {
  if (ids.empty()) throw ShapeError("cannot encode an empty document");
  const std::size_t window = encoder_.config().seg_len - (special_ ? 2 : 0);
  const SegmentPlan plan = plan_segments(padded_length(ids.size(), window, stride_), window, stride_);
  return encode_windows(encoder_, ids, ids.size(), plan, special_);
}

template Tensor<float> encode_long(const TransformerEncoder<float>&, const TokenSequence&,
                                   const SegmentPlan&);
template Tensor<double> encode_long(const TransformerEncoder<double>&, const TokenSequence&,
                                    const SegmentPlan&);
template class SegmentedTransformer<float>;
template class SegmentedTransformer<double>;

}  // namespace longcode
