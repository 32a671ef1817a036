#include "bqnn/model.hpp"

#include <stdexcept>

namespace bqnn {

int per_upload_parameter_formula(int modes) {
  return 3 * modes * (modes - 1) / 2 + 3 * modes;
}

Model::Model(ModelSpec spec, LearningRates lr) : spec_(std::move(spec)), lr_(lr) {
  if (spec_.modes < 1) throw std::invalid_argument("Model: modes must be positive");
  if (spec_.uploads < 1) throw std::invalid_argument("Model: uploads must be positive");
  if (spec_.features < 1 || spec_.outputs < 1)
    throw std::invalid_argument("Model: readout dimensions must be positive");
  pairs_ = SystemParams::pair_count(spec_.modes);
  if (spec_.encoding) {
    spec_.encoding->dim =
        spec_.encoding->target == EncodingTarget::eps ? spec_.modes : pairs_;
    check_encoding_combo();
  }

  int off = spec_.modes;  // delta block leads
  off_eps_ = encodes(EncodingTarget::eps) ? -1 : off;
  if (off_eps_ >= 0) off += 2 * spec_.modes;
  off_g_ = encodes(EncodingTarget::g) ? -1 : off;
  if (off_g_ >= 0) off += pairs_;
  off_gs_ = encodes(EncodingTarget::gs) ? -1 : off;
  if (off_gs_ >= 0) off += 2 * pairs_;
  off_enc_ = spec_.encoding ? off : -1;
  if (off_enc_ >= 0) off += spec_.encoding->param_count();
  per_upload_count_ = off;

  kappa = VecR::Ones(spec_.modes);
  UploadParams blank;
  blank.delta = VecR::Zero(spec_.modes);
  blank.eps = VecC::Zero(spec_.modes);
  blank.g = VecR::Zero(pairs_);
  blank.gs = VecC::Zero(pairs_);
  if (spec_.encoding) blank.enc = EncodingParams::zero(*spec_.encoding);
  upload.assign(spec_.uploads, blank);
  readout_w = MatR::Zero(spec_.outputs, spec_.features);
  readout_b = VecR::Zero(spec_.outputs);
}

void Model::check_encoding_combo() const {
  const auto& e = *spec_.encoding;
  if (e.target == EncodingTarget::g && e.kind == EncodingKind::phase)
    throw std::invalid_argument("Model: phase encoding into g is not supported");
  if (e.target != EncodingTarget::eps && pairs_ == 0)
    throw std::invalid_argument("Model: coupling encodings need at least two modes");
}

VecR Model::flatten() const {
  VecR flat(trainable_count());
  for (int r = 0; r < spec_.uploads; ++r) {
    const UploadParams& up = upload[r];
    const int base = r * per_upload_count_;
    for (int k = 0; k < spec_.modes; ++k) flat[base + k] = up.delta[k];
    if (off_eps_ >= 0)
      for (int k = 0; k < spec_.modes; ++k) {
        flat[base + off_eps_ + 2 * k] = up.eps[k].real();
        flat[base + off_eps_ + 2 * k + 1] = up.eps[k].imag();
      }
    if (off_g_ >= 0)
      for (int p = 0; p < pairs_; ++p) flat[base + off_g_ + p] = up.g[p];
    if (off_gs_ >= 0)
      for (int p = 0; p < pairs_; ++p) {
        flat[base + off_gs_ + 2 * p] = up.gs[p].real();
        flat[base + off_gs_ + 2 * p + 1] = up.gs[p].imag();
      }
    if (off_enc_ >= 0) pack_encoding(*spec_.encoding, up.enc, flat.data() + base + off_enc_);
  }
  int pos = dyn_count();
  for (int o = 0; o < spec_.outputs; ++o)
    for (int f = 0; f < spec_.features; ++f) flat[pos++] = readout_w(o, f);
  for (int o = 0; o < spec_.outputs; ++o) flat[pos++] = readout_b[o];
  return flat;
}

void Model::unflatten(const VecR& flat) {
  if (static_cast<int>(flat.size()) != trainable_count())
    throw std::invalid_argument("Model::unflatten: size mismatch");
  for (int r = 0; r < spec_.uploads; ++r) {
    UploadParams& up = upload[r];
    const int base = r * per_upload_count_;
    for (int k = 0; k < spec_.modes; ++k) up.delta[k] = flat[base + k];
    if (off_eps_ >= 0)
      for (int k = 0; k < spec_.modes; ++k)
        up.eps[k] = cd(flat[base + off_eps_ + 2 * k], flat[base + off_eps_ + 2 * k + 1]);
    if (off_g_ >= 0)
      for (int p = 0; p < pairs_; ++p) up.g[p] = flat[base + off_g_ + p];
    if (off_gs_ >= 0)
      for (int p = 0; p < pairs_; ++p)
        up.gs[p] = cd(flat[base + off_gs_ + 2 * p], flat[base + off_gs_ + 2 * p + 1]);
    if (off_enc_ >= 0) unpack_encoding(*spec_.encoding, up.enc, flat.data() + base + off_enc_);
  }
  int pos = dyn_count();
  for (int o = 0; o < spec_.outputs; ++o)
    for (int f = 0; f < spec_.features; ++f) readout_w(o, f) = flat[pos++];
  for (int o = 0; o < spec_.outputs; ++o) readout_b[o] = flat[pos++];
}

VecR Model::lr_vector() const {
  VecR lrs(trainable_count());
  for (int r = 0; r < spec_.uploads; ++r) {
    const int base = r * per_upload_count_;
    for (int k = 0; k < spec_.modes; ++k) lrs[base + k] = lr_.delta;
    if (off_eps_ >= 0)
      for (int k = 0; k < 2 * spec_.modes; ++k) lrs[base + off_eps_ + k] = lr_.eps;
    if (off_g_ >= 0)
      for (int p = 0; p < pairs_; ++p) lrs[base + off_g_ + p] = lr_.g;
    if (off_gs_ >= 0)
      for (int p = 0; p < 2 * pairs_; ++p) lrs[base + off_gs_ + p] = lr_.gs;
    if (off_enc_ >= 0) {
      const double rate = lr_.encoding(spec_.encoding->target);
      for (int p = 0; p < spec_.encoding->param_count(); ++p) lrs[base + off_enc_ + p] = rate;
    }
  }
  int pos = dyn_count();
  for (int o = 0; o < spec_.outputs * spec_.features; ++o) lrs[pos++] = lr_.readout_w;
  for (int o = 0; o < spec_.outputs; ++o) lrs[pos++] = lr_.readout_b;
  return lrs;
}

std::vector<std::string> Model::param_names() const {
  std::vector<std::string> names(trainable_count());
  for (int r = 0; r < spec_.uploads; ++r) {
    const std::string u = "u" + std::to_string(r) + ".";
    const int base = r * per_upload_count_;
    for (int k = 0; k < spec_.modes; ++k)
      names[base + k] = u + "delta[" + std::to_string(k) + "]";
    if (off_eps_ >= 0)
      for (int k = 0; k < spec_.modes; ++k) {
        names[base + off_eps_ + 2 * k] = u + "eps[" + std::to_string(k) + "].re";
        names[base + off_eps_ + 2 * k + 1] = u + "eps[" + std::to_string(k) + "].im";
      }
    if (off_g_ >= 0)
      for (int p = 0; p < pairs_; ++p)
        names[base + off_g_ + p] = u + "g[" + std::to_string(p) + "]";
    if (off_gs_ >= 0)
      for (int p = 0; p < pairs_; ++p) {
        names[base + off_gs_ + 2 * p] = u + "gs[" + std::to_string(p) + "].re";
        names[base + off_gs_ + 2 * p + 1] = u + "gs[" + std::to_string(p) + "].im";
      }
    if (off_enc_ >= 0) {
      const auto enc_names = encoding_param_names(*spec_.encoding);
      for (int p = 0; p < static_cast<int>(enc_names.size()); ++p)
        names[base + off_enc_ + p] = u + enc_names[p];
    }
  }
  int pos = dyn_count();
  for (int o = 0; o < spec_.outputs; ++o)
    for (int f = 0; f < spec_.features; ++f)
      names[pos++] = "w[" + std::to_string(o) + "," + std::to_string(f) + "]";
  for (int o = 0; o < spec_.outputs; ++o) names[pos++] = "b[" + std::to_string(o) + "]";
  return names;
}

namespace {

double cyclic(const VecR& x_slice, int i) {
  if (x_slice.size() == 0)
    throw std::invalid_argument("Model: empty input slice for an encoded class");
  return x_slice[i % x_slice.size()];
}

}  // namespace

SystemParams Model::system_for(int upload_index, const VecR& x_slice) const {
  const UploadParams& up = upload.at(upload_index);
  SystemParams sp;
  sp.kappa = kappa;
  sp.delta = up.delta;
  sp.eps = up.eps;
  sp.g = up.g;
  sp.gs = up.gs;
  if (spec_.encoding) {
    const auto& e = *spec_.encoding;
    VecC encoded(e.dim);
    for (int i = 0; i < e.dim; ++i) encoded[i] = encoded_value(e, up.enc, i, cyclic(x_slice, i));
    switch (e.target) {
      case EncodingTarget::eps: sp.eps = encoded; break;
      case EncodingTarget::g: sp.g = encoded.real(); break;
      case EncodingTarget::gs: sp.gs = encoded; break;
    }
  }
  return sp;
}

FreshEffects Model::fresh_effects(int upload_index, const VecR& x_slice) const {
  const UploadParams& up = upload.at(upload_index);
  const int base = upload_index * per_upload_count_;
  const int m = spec_.modes;
  FreshEffects out;
  out.reserve(per_upload_count_);

  for (int k = 0; k < m; ++k) {
    ParamEffect e;
    add_delta_effect(e, m, k, 1.0);
    out.emplace_back(base + k, std::move(e));
  }
  if (off_eps_ >= 0)
    for (int k = 0; k < m; ++k) {
      ParamEffect re, im;
      add_eps_effect(re, m, k, cd(1.0, 0.0));
      add_eps_effect(im, m, k, cd(0.0, 1.0));
      out.emplace_back(base + off_eps_ + 2 * k, std::move(re));
      out.emplace_back(base + off_eps_ + 2 * k + 1, std::move(im));
    }
  if (off_g_ >= 0)
    for (int p = 0; p < pairs_; ++p) {
      const auto [k, l] = SystemParams::pair_modes(m, p);
      ParamEffect e;
      add_g_effect(e, m, k, l, cd(1.0, 0.0));
      out.emplace_back(base + off_g_ + p, std::move(e));
    }
  if (off_gs_ >= 0)
    for (int p = 0; p < pairs_; ++p) {
      const auto [k, l] = SystemParams::pair_modes(m, p);
      ParamEffect re, im;
      add_gs_effect(re, m, k, l, cd(1.0, 0.0));
      add_gs_effect(im, m, k, l, cd(0.0, 1.0));
      out.emplace_back(base + off_gs_ + 2 * p, std::move(re));
      out.emplace_back(base + off_gs_ + 2 * p + 1, std::move(im));
    }
  if (off_enc_ >= 0) {
    const auto& e = *spec_.encoding;
    std::vector<ParamEffect> effects(e.param_count());
    std::vector<char> used(effects.size(), 0);
    std::vector<std::pair<int, cd>> derivs;
    for (int i = 0; i < e.dim; ++i) {
      derivs.clear();
      encoded_value_derivatives(e, up.enc, i, cyclic(x_slice, i), derivs);
      for (const auto& [li, dv] : derivs) {
        used[li] = 1;
        switch (e.target) {
          case EncodingTarget::eps:
            add_eps_effect(effects[li], m, i, dv);
            break;
          case EncodingTarget::g: {
            const auto [k, l] = SystemParams::pair_modes(m, i);
            add_g_effect(effects[li], m, k, l, dv);
            break;
          }
          case EncodingTarget::gs: {
            const auto [k, l] = SystemParams::pair_modes(m, i);
            add_gs_effect(effects[li], m, k, l, dv);
            break;
          }
        }
      }
    }
    for (int li = 0; li < static_cast<int>(effects.size()); ++li)
      if (used[li]) out.emplace_back(base + off_enc_ + li, std::move(effects[li]));
  }
  return out;
}

VecR Model::logits(const VecR& features) const {
  if (features.size() != readout_w.cols())
    throw std::invalid_argument("Model::logits: feature size mismatch");
  return readout_w * features + readout_b;
}

int Model::clamp_step(const ClampConfig& config) {
  int moved = 0;
  const bool enc_gs = encodes(EncodingTarget::gs);
  const bool enc_g = encodes(EncodingTarget::g);

  if ((enc_gs || enc_g) && !config.gs_max)
    throw std::invalid_argument("clamp: gs_max required when a coupling class is encoded");

  for (auto& up : upload) {
    if (enc_gs) {
      ClampLimits limits;
      limits.gs_max = *config.gs_max;
      limits.g_max = config.g_max;
      limits.g_min = spec_.encoding->kind == EncodingKind::phase
                         ? limits.gs_max * (spec_.modes - 1)
                         : limits.gs_max;
      moved += clamp_encoded_coefficients(*spec_.encoding, up.enc, limits);
      verify_encoded_range(*spec_.encoding, up.enc, limits);
      moved += clamp_coupling_magnitudes(up.g, limits.g_min, limits.g_max);
    } else if (enc_g) {
      ClampLimits limits;
      limits.gs_max = *config.gs_max;
      limits.g_max = config.g_max;
      limits.g_min = limits.gs_max;
      moved += clamp_squeezing_magnitudes(up.gs, limits.gs_max);
      moved += clamp_encoded_coefficients(*spec_.encoding, up.enc, limits);
      verify_encoded_range(*spec_.encoding, up.enc, limits);
    } else if (pairs_ > 0) {
      if (config.gs_max) moved += clamp_squeezing_magnitudes(up.gs, *config.gs_max);
      double max_gs = 0.0, min_g = std::abs(up.g[0]);
      for (int p = 0; p < pairs_; ++p) {
        max_gs = std::max(max_gs, std::abs(up.gs[p]));
        min_g = std::min(min_g, std::abs(up.g[p]));
      }
      if (max_gs > min_g) {
        const double mid = 0.5 * (max_gs + min_g);
        moved += clamp_squeezing_magnitudes(up.gs, mid);
        moved += clamp_coupling_magnitudes(up.g, mid, config.g_max);
      } else {
        moved += clamp_coupling_magnitudes(up.g, 0.0, config.g_max);
      }
    }
  }
  return moved;
}

}  // namespace bqnn
