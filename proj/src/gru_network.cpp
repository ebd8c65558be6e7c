/*
 * Copyright 2026 The GroupShap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cmath>
#include <string>

#include "gshap/errors.hpp"
#include "gshap/gru_forecaster.hpp"

namespace gshap::forecast {

namespace {

Mat Sigmoid(const Mat& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

void RequireRows(Index got, Index want, const char* what) {
  if (got != want) {
    Fail(ErrorKind::kDimension, std::string(what) + ": expected " + std::to_string(want) +
                                    " rows, got " + std::to_string(got));
  }
}

// One batched GRU step. Shapes: x (in x B), h (H x B).
Mat LayerStep(const GruLayerRef& p, const Mat& x, const Mat& h, LayerStepCache* cache) {
  const Index H = p.shape.hidden;
  const Mat ax = p.w * x;
  const Mat ah = p.u.topRows(2 * H) * h;
  Mat z = Sigmoid((ax.topRows(H) + ah.topRows(H)).colwise() + p.b.head(H));
  Mat r = Sigmoid((ax.middleRows(H, H) + ah.bottomRows(H)).colwise() + p.b.segment(H, H));
  const Mat rh = r.cwiseProduct(h);
  Mat c = ((ax.bottomRows(H) + p.u.bottomRows(H) * rh).colwise() + p.b.tail(H))
              .array()
              .tanh()
              .matrix();
  Mat out = h + z.cwiseProduct(c - h);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h;
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->c = std::move(c);
  }
  return out;
}

Mat EncoderForward(std::span<const double> params, const EncoderLayout& layout,
                   const std::vector<Mat>& steps, EncoderCache* cache) {
  const auto layers = layout.View(params);
  const Index batch = steps.empty() ? 0 : steps.front().cols();
  if (cache != nullptr) cache->assign(layers.size(), std::vector<LayerStepCache>(steps.size()));
  std::vector<Mat> inputs = steps;
  Mat h;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = Mat::Zero(layers[l].shape.hidden, batch);
    for (std::size_t t = 0; t < inputs.size(); ++t) {
      RequireRows(inputs[t].rows(), layers[l].shape.input, "GRU layer input");
      h = LayerStep(layers[l], inputs[t], h, cache ? &(*cache)[l][t] : nullptr);
      inputs[t] = h;
    }
  }
  return h;
}

void EncoderBackward(std::span<const double> params, const EncoderLayout& layout,
                     const EncoderCache& cache, const Mat& d_top, std::span<double> grads) {
  const auto layers = layout.View(params);
  const std::size_t steps = cache.front().size();
  std::vector<Mat> d_outputs(steps);
  d_outputs[steps - 1] = d_top;

  std::size_t offset = layout.offset;
  std::vector<std::size_t> offsets;
  for (const auto& s : layout.layers) {
    offsets.push_back(offset);
    offset += s.size();
  }

  for (std::size_t l = layers.size(); l-- > 0;) {
    const GruLayerRef& p = layers[l];
    GruLayerMut g(grads.data() + offsets[l], p.shape);
    const Index H = p.shape.hidden;
    std::vector<Mat> d_inputs(steps);
    Mat dh;
    for (std::size_t t = steps; t-- > 0;) {
      const LayerStepCache& s = cache[l][t];
      if (dh.size() == 0) dh = Mat::Zero(H, s.x.cols());
      if (d_outputs[t].size() != 0) dh += d_outputs[t];

      const Mat dz = dh.cwiseProduct(s.c - s.h_prev);
      const Mat dc = dh.cwiseProduct(s.z);
      Mat dh_prev = dh.cwiseProduct((1.0 - s.z.array()).matrix());

      Mat da(3 * H, s.x.cols());
      da.bottomRows(H) = dc.cwiseProduct((1.0 - s.c.array().square()).matrix());
      const Mat rh = s.r.cwiseProduct(s.h_prev);
      g.u.bottomRows(H).noalias() += da.bottomRows(H) * rh.transpose();
      const Mat drh = p.u.bottomRows(H).transpose() * da.bottomRows(H);
      dh_prev += drh.cwiseProduct(s.r);
      da.middleRows(H, H) =
          drh.cwiseProduct(s.h_prev).cwiseProduct(s.r.cwiseProduct((1.0 - s.r.array()).matrix()));
      da.topRows(H) = dz.cwiseProduct(s.z.cwiseProduct((1.0 - s.z.array()).matrix()));

      g.w.noalias() += da * s.x.transpose();
      g.b += da.rowwise().sum();
      g.u.topRows(2 * H).noalias() += da.topRows(2 * H) * s.h_prev.transpose();
      dh_prev.noalias() += p.u.topRows(2 * H).transpose() * da.topRows(2 * H);
      if (l > 0) d_inputs[t] = p.w.transpose() * da;
      dh = std::move(dh_prev);
    }
    d_outputs = std::move(d_inputs);
  }
}

std::size_t LinearOffset(const HeadLayout& head, std::size_t layer) {
  std::size_t offset = head.offset;
  for (std::size_t i = 0; i < layer; ++i) offset += head.layers[i].size();
  return offset;
}

}  // namespace

Vec GruCellForward(const Vec& x, const Vec& h, const GruLayerRef& layer) {
  RequireRows(x.size(), layer.shape.input, "GRU cell input");
  RequireRows(h.size(), layer.shape.hidden, "GRU cell hidden state");
  return LayerStep(layer, x, h, nullptr);
}

Vec EncodeSequence(const Mat& sequence, std::span<const GruLayerRef> layers) {
  if (layers.empty()) Fail(ErrorKind::kDimension, "encoder has no layers");
  std::vector<Mat> steps;
  for (Index t = 0; t < sequence.rows(); ++t) steps.push_back(sequence.row(t).transpose());
  Mat h;
  for (const auto& layer : layers) {
    h = Mat::Zero(layer.shape.hidden, 1);
    for (auto& x : steps) {
      RequireRows(x.rows(), layer.shape.input, "GRU layer input");
      h = LayerStep(layer, x, h, nullptr);
      x = h;
    }
  }
  return h;
}

std::size_t EncoderLayout::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

std::vector<GruLayerRef> EncoderLayout::View(std::span<const double> params) const {
  std::vector<GruLayerRef> out;
  std::size_t offset = this->offset;
  for (const auto& l : layers) {
    out.emplace_back(params.data() + offset, l);
    offset += l.size();
  }
  return out;
}

std::size_t HeadLayout::size() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  return n;
}

NetworkLayout NetworkLayout::Make(Index tech_inputs, Index text_inputs, const TrainConfig& config) {
  NetworkLayout layout;
  const Index H = config.hidden_size;
  auto make_encoder = [&](Index inputs, std::size_t offset) {
    EncoderLayout e;
    e.offset = offset;
    for (int l = 0; l < config.layers; ++l) e.layers.push_back({l == 0 ? inputs : H, H});
    return e;
  };
  layout.tech = make_encoder(tech_inputs, 0);
  std::size_t offset = layout.tech.size();
  Index fused = H;
  if (text_inputs > 0) {
    layout.text = make_encoder(text_inputs, offset);
    offset += layout.text->size();
    fused += H;
  }
  layout.head.offset = offset;
  layout.head.dropout = config.dropout;
  Index in = fused;
  for (int width : config.head_hidden) {
    layout.head.layers.push_back({in, width});
    in = width;
  }
  layout.head.layers.push_back({in, 1});
  layout.total = offset + layout.head.size();
  return layout;
}

Vec Network::Forward(std::span<const double> params, const BatchInputs& inputs, bool training,
                     std::mt19937_64* rng, ForwardCache* cache) const {
  if (params.size() != layout_.total) {
    Fail(ErrorKind::kDimension, "parameter vector has " + std::to_string(params.size()) +
                                    " entries, layout needs " + std::to_string(layout_.total));
  }
  Mat fused = EncoderForward(params, layout_.tech, inputs.tech, cache ? &cache->tech : nullptr);
  if (layout_.text) {
    if (inputs.text.size() != inputs.tech.size()) {
      Fail(ErrorKind::kDimension, "text stream has a different number of steps");
    }
    const Mat h_text =
        EncoderForward(params, *layout_.text, inputs.text, cache ? &cache->text : nullptr);
    Mat joined(fused.rows() + h_text.rows(), fused.cols());
    joined << fused, h_text;
    fused = std::move(joined);
  }
  if (cache != nullptr) {
    cache->head_inputs.clear();
    cache->head_pre.clear();
    cache->dropout.clear();
  }
  const auto& layers = layout_.head.layers;
  const double p = layout_.head.dropout;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mat a = std::move(fused);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LinearShape& s = layers[i];
    RequireRows(a.rows(), s.in, "fusion head input");
    const double* base = params.data() + LinearOffset(layout_.head, i);
    Eigen::Map<const Mat> w(base, s.out, s.in);
    Eigen::Map<const Vec> b(base + s.out * s.in, s.out);
    if (cache != nullptr) cache->head_inputs.push_back(a);
    Mat pre = (w * a).colwise() + b;
    if (i + 1 == layers.size()) {
      a = std::move(pre);
      break;
    }
    a = pre.cwiseMax(0.0);
    if (cache != nullptr) cache->head_pre.push_back(std::move(pre));
    if (training && p > 0.0) {
      Mat mask(a.rows(), a.cols());
      const double keep = 1.0 / (1.0 - p);
      for (Index c = 0; c < mask.cols(); ++c) {
        for (Index r = 0; r < mask.rows(); ++r) mask(r, c) = unit(*rng) < p ? 0.0 : keep;
      }
      a = a.cwiseProduct(mask);
      if (cache != nullptr) cache->dropout.push_back(std::move(mask));
    }
  }
  return a.row(0).transpose();
}

void Network::Backward(std::span<const double> params, const ForwardCache& cache,
                       const Vec& d_output, std::span<double> grads) const {
  const auto& layers = layout_.head.layers;
  Mat d = d_output.transpose();  // 1 x B
  for (std::size_t i = layers.size(); i-- > 0;) {
    const LinearShape& s = layers[i];
    const std::size_t off = LinearOffset(layout_.head, i);
    Eigen::Map<const Mat> w(params.data() + off, s.out, s.in);
    Eigen::Map<Mat> gw(grads.data() + off, s.out, s.in);
    Eigen::Map<Vec> gb(grads.data() + off + s.out * s.in, s.out);
    gw.noalias() += d * cache.head_inputs[i].transpose();
    gb += d.rowwise().sum();
    Mat d_in = w.transpose() * d;
    if (i > 0) {
      // Undo dropout and ReLU of the previous hidden layer.
      if (!cache.dropout.empty()) d_in = d_in.cwiseProduct(cache.dropout[i - 1]);
      d_in = (cache.head_pre[i - 1].array() > 0.0).select(d_in, 0.0);
    }
    d = std::move(d_in);
  }
  const Index H = layout_.tech.hidden();
  EncoderBackward(params, layout_.tech, cache.tech, d.topRows(H), grads);
  if (layout_.text) {
    EncoderBackward(params, *layout_.text, cache.text, d.bottomRows(layout_.text->hidden()),
                    grads);
  }
}

double Network::FusionForward(std::span<const double> params, const Vec& h_tech,
                              const Vec& h_text, bool training, std::mt19937_64* rng) const {
  const bool has_text = h_text.size() > 0;
  if (has_text != layout_.text.has_value()) {
    Fail(ErrorKind::kDimension, "fusion inputs do not match the model variant");
  }
  Vec joined(h_tech.size() + h_text.size());
  joined << h_tech, h_text;
  const auto& layers = layout_.head.layers;
  RequireRows(joined.size(), layers.front().in, "fusion head input");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec a = std::move(joined);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LinearShape& s = layers[i];
    const double* base = params.data() + LinearOffset(layout_.head, i);
    Eigen::Map<const Mat> w(base, s.out, s.in);
    Eigen::Map<const Vec> b(base + s.out * s.in, s.out);
    Vec pre = w * a + b;
    if (i + 1 == layers.size()) return pre(0);
    a = pre.cwiseMax(0.0);
    if (training && layout_.head.dropout > 0.0) {
      const double keep = 1.0 / (1.0 - layout_.head.dropout);
      for (Index r = 0; r < a.size(); ++r) {
        a(r) = unit(*rng) < layout_.head.dropout ? 0.0 : a(r) * keep;
      }
    }
  }
  return a(0);
}

}  // namespace gshap::forecast
