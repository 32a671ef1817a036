#include "bqnn/encoding.hpp"

#include <cmath>
#include <stdexcept>

namespace bqnn {

namespace {

constexpr cd kI{0.0, 1.0};

struct Layout {
  int width;        // reals per component of theta0 / theta_bias
  int theta0;       // offset, -1 when frozen
  int theta_bias;
  int phi0;         // -1 unless phase kind
  int phi_bias;
  int count;
};

Layout layout_of(const EncodingSpec& spec) {
  Layout l;
  l.width = spec.real_theta() ? 1 : 2;
  const int w = l.width * spec.dim;
  int off = 0;
  l.theta0 = spec.train_theta0 ? 0 : -1;
  if (l.theta0 >= 0) off += w;
  l.theta_bias = spec.has_bias() ? off : -1;
  if (l.theta_bias >= 0) off += w;
  if (spec.kind == EncodingKind::phase) {
    l.phi0 = off;
    l.phi_bias = l.phi0 + spec.dim;
    off = l.phi_bias + spec.dim;
  } else {
    l.phi0 = -1;
    l.phi_bias = -1;
  }
  l.count = off;
  return l;
}

}  // namespace

int EncodingSpec::param_count() const { return layout_of(*this).count; }

EncodingParams EncodingParams::zero(const EncodingSpec& spec) {
  EncodingParams p;
  p.theta0 = VecC::Zero(spec.dim);
  p.theta_bias = VecC::Zero(spec.dim);
  const int phases = spec.kind == EncodingKind::phase ? spec.dim : 0;
  p.phi0 = VecR::Zero(phases);
  p.phi_bias = VecR::Zero(phases);
  return p;
}

cd encoded_value(const EncodingSpec& spec, const EncodingParams& p, int i, double xi) {
  if (i < 0 || i >= spec.dim) throw std::invalid_argument("encoded_value: component out of range");
  if (spec.kind == EncodingKind::amplitude) {
    if (spec.real_theta()) return cd(p.theta0[i].real() * xi + p.theta_bias[i].real(), 0.0);
    return p.theta0[i] * xi + p.theta_bias[i];
  }
  const cd e = std::exp(kI * (p.phi0[i] * xi + p.phi_bias[i]));
  if (spec.real_theta()) return p.theta0[i].real() * e;
  return p.theta0[i] * e + p.theta_bias[i];
}

void encoded_value_derivatives(const EncodingSpec& spec, const EncodingParams& p, int i,
                               double xi, std::vector<std::pair<int, cd>>& out) {
  if (i < 0 || i >= spec.dim)
    throw std::invalid_argument("encoded_value_derivatives: component out of range");
  const Layout l = layout_of(spec);
  if (spec.kind == EncodingKind::amplitude) {
    if (spec.real_theta()) {
      if (l.theta0 >= 0) out.emplace_back(l.theta0 + i, cd(xi, 0.0));
      out.emplace_back(l.theta_bias + i, cd(1.0, 0.0));
    } else {
      if (l.theta0 >= 0) {
        out.emplace_back(l.theta0 + 2 * i, cd(xi, 0.0));
        out.emplace_back(l.theta0 + 2 * i + 1, kI * xi);
      }
      out.emplace_back(l.theta_bias + 2 * i, cd(1.0, 0.0));
      out.emplace_back(l.theta_bias + 2 * i + 1, kI);
    }
    return;
  }
  const cd e = std::exp(kI * (p.phi0[i] * xi + p.phi_bias[i]));
  if (spec.real_theta()) {
    if (l.theta0 >= 0) out.emplace_back(l.theta0 + i, e);
    const cd dphase = kI * p.theta0[i].real() * e;
    out.emplace_back(l.phi0 + i, dphase * xi);
    out.emplace_back(l.phi_bias + i, dphase);
    return;
  }
  if (l.theta0 >= 0) {
    out.emplace_back(l.theta0 + 2 * i, e);
    out.emplace_back(l.theta0 + 2 * i + 1, kI * e);
  }
  out.emplace_back(l.theta_bias + 2 * i, cd(1.0, 0.0));
  out.emplace_back(l.theta_bias + 2 * i + 1, kI);
  const cd dphase = kI * p.theta0[i] * e;
  out.emplace_back(l.phi0 + i, dphase * xi);
  out.emplace_back(l.phi_bias + i, dphase);
}

void pack_encoding(const EncodingSpec& spec, const EncodingParams& p, double* dst) {
  const Layout l = layout_of(spec);
  for (int i = 0; i < spec.dim; ++i) {
    if (l.theta0 >= 0) {
      dst[l.theta0 + l.width * i] = p.theta0[i].real();
      if (l.width == 2) dst[l.theta0 + 2 * i + 1] = p.theta0[i].imag();
    }
    if (l.theta_bias >= 0) {
      dst[l.theta_bias + l.width * i] = p.theta_bias[i].real();
      if (l.width == 2) dst[l.theta_bias + 2 * i + 1] = p.theta_bias[i].imag();
    }
    if (l.phi0 >= 0) {
      dst[l.phi0 + i] = p.phi0[i];
      dst[l.phi_bias + i] = p.phi_bias[i];
    }
  }
}

void unpack_encoding(const EncodingSpec& spec, EncodingParams& p, const double* src) {
  const Layout l = layout_of(spec);
  for (int i = 0; i < spec.dim; ++i) {
    if (l.theta0 >= 0) {
      const double im = l.width == 2 ? src[l.theta0 + 2 * i + 1] : 0.0;
      p.theta0[i] = cd(src[l.theta0 + l.width * i], im);
    }
    if (l.theta_bias >= 0) {
      const double im = l.width == 2 ? src[l.theta_bias + 2 * i + 1] : 0.0;
      p.theta_bias[i] = cd(src[l.theta_bias + l.width * i], im);
    }
    if (l.phi0 >= 0) {
      p.phi0[i] = src[l.phi0 + i];
      p.phi_bias[i] = src[l.phi_bias + i];
    }
  }
}

std::vector<std::string> encoding_param_names(const EncodingSpec& spec) {
  const Layout l = layout_of(spec);
  std::vector<std::string> names(l.count);
  for (int i = 0; i < spec.dim; ++i) {
    const std::string tag = std::to_string(i);
    if (l.theta0 >= 0) {
      names[l.theta0 + l.width * i] = "enc.theta0[" + tag + "].re";
      if (l.width == 2) names[l.theta0 + 2 * i + 1] = "enc.theta0[" + tag + "].im";
    }
    if (l.theta_bias >= 0) {
      names[l.theta_bias + l.width * i] = "enc.theta_bias[" + tag + "].re";
      if (l.width == 2) names[l.theta_bias + 2 * i + 1] = "enc.theta_bias[" + tag + "].im";
    }
    if (l.phi0 >= 0) {
      names[l.phi0 + i] = "enc.phi0[" + tag + "]";
      names[l.phi_bias + i] = "enc.phi_bias[" + tag + "]";
    }
  }
  if (spec.real_theta())
    for (auto& n : names) {
      const auto pos = n.rfind(".re");
      if (pos != std::string::npos && pos == n.size() - 3) n.erase(pos);
    }
  return names;
}

}  // namespace bqnn
