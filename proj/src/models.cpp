#include "jamloc/models.hpp"

#include <sstream>
#include <stdexcept>

namespace jamloc {

void AutoencoderSpec::validate() const {
  if (in_channels <= 0 || taps <= 0) throw std::invalid_argument("autoencoder: bad input shape");
  if (stage_channels.empty()) throw std::invalid_argument("autoencoder: no stages");
  for (int c : stage_channels)
    if (c <= 0) throw std::invalid_argument("autoencoder: non-positive stage width");
  if (blocks_per_stage < 0 || convnext_kernel < 1 || convnext_kernel % 2 == 0 || expansion < 1)
    throw std::invalid_argument("autoencoder: bad block configuration");
  if (noise_sigma < 0) throw std::invalid_argument("autoencoder: negative noise sigma");
}

std::string AutoencoderSpec::canonical() const {
  std::ostringstream os;
  os << "in=" << in_channels << ";taps=" << taps << ";stages=";
  for (std::size_t i = 0; i < stage_channels.size(); ++i)
    os << (i ? "," : "") << stage_channels[i];
  os << ";blocks=" << blocks_per_stage << ";kernel=" << convnext_kernel
     << ";expansion=" << expansion;
  return os.str();
}

std::uint64_t AutoencoderSpec::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace nn {
namespace {

int down_kernel(std::size_t stage) { return stage == 0 ? 4 : 3; }
constexpr int kDownStride = 2;
constexpr int kDownPad = 1;

std::string stage_name(const std::string& root, std::size_t i) {
  return root + ".stage" + std::to_string(i + 1);
}

}  // namespace

// ---------------------------------------------------------------- Encoder

template <typename T>
Encoder<T>::Encoder(const AutoencoderSpec& spec, std::mt19937_64& init_rng)
    : spec_(spec), noise_(static_cast<T>(spec.noise_sigma)) {
  spec.validate();
  int in_ch = spec.in_channels;
  int len = spec.taps;
  lengths_.push_back(len);
  for (std::size_t i = 0; i < spec.stage_channels.size(); ++i) {
    const int out_ch = spec.stage_channels[i];
    const std::string name = stage_name("encoder", i);
    Stage st;
    st.down = Conv1d<T>(name + ".down", in_ch, out_ch, down_kernel(i), kDownStride, kDownPad,
                        init_rng);
    for (int b = 0; b < spec.blocks_per_stage; ++b)
      st.blocks.emplace_back(name + ".block" + std::to_string(b), out_ch, spec.convnext_kernel,
                             spec.expansion, init_rng);
    len = st.down.out_len(len);
    if (len < 1) throw std::invalid_argument("autoencoder: too many stages for input length");
    lengths_.push_back(len);
    stages_.push_back(std::move(st));
    in_ch = out_ch;
  }
}

template <typename T>
typename Encoder<T>::Output Encoder<T>::forward(const Tensor<T>& x, bool training,
                                                std::mt19937_64& noise_rng) {
  if (x.rank() != 3 || x.dim(1) != spec_.in_channels || x.dim(2) != spec_.taps)
    throw std::invalid_argument("encoder expects [B, " + std::to_string(spec_.in_channels) +
                                ", " + std::to_string(spec_.taps) + "], got " +
                                x.shape_string());
  Tensor<T> h = swap_last_two(x);
  for (std::size_t i = 0; i < stages_.size(); ++i) {
    if (i == 0 || spec_.noise_mode == NoiseMode::every_stage)
      h = noise_.forward(h, training, noise_rng);
    h = stages_[i].down.forward(h);
    for (auto& blk : stages_[i].blocks) h = blk.forward(h);
  }
  const int b = h.dim(0), len = h.dim(1), ch = h.dim(2);
  Tensor<T> emb({b, ch});
  for (int i = 0; i < b; ++i)
    for (int l = 0; l < len; ++l)
      for (int c = 0; c < ch; ++c) emb.at(i, c) += h.at(i, l, c);
  for (auto& v : emb.values()) v /= static_cast<T>(len);
  return {std::move(emb), std::move(h)};
}

template <typename T>
bool Encoder<T>::stage_trainable(std::size_t i) {
  ParamList<T> ps;
  collect_stage(i, ps);
  for (auto* p : ps)
    if (p->trainable) return true;
  return false;
}

template <typename T>
void Encoder<T>::backward(const Tensor<T>& d_featmap, const Tensor<T>& d_embedding) {
  const int len = lengths_.back();
  const int ch = spec_.embedding_dim();
  const int b = !d_featmap.empty() ? d_featmap.dim(0) : d_embedding.dim(0);
  Tensor<T> g = d_featmap.empty() ? Tensor<T>({b, len, ch}) : d_featmap;
  if (!d_embedding.empty()) {
    const T inv = T(1) / static_cast<T>(len);
    for (int i = 0; i < b; ++i)
      for (int l = 0; l < len; ++l)
        for (int c = 0; c < ch; ++c) g.at(i, l, c) += d_embedding.at(i, c) * inv;
  }
  std::vector<bool> trainable(stages_.size());
  for (std::size_t i = 0; i < stages_.size(); ++i) trainable[i] = stage_trainable(i);
  for (std::size_t s = stages_.size(); s-- > 0;) {
    bool earlier = false;
    for (std::size_t j = 0; j < s; ++j) earlier = earlier || trainable[j];
    if (!trainable[s] && !earlier) return;
    auto& st = stages_[s];
    for (std::size_t k = st.blocks.size(); k-- > 0;) g = st.blocks[k].backward(g);
    g = st.down.backward(g, earlier);
    if (!earlier) return;
  }
}

template <typename T>
void Encoder<T>::collect_stage(std::size_t i, ParamList<T>& out) {
  auto& st = stages_.at(i);
  st.down.collect(out);
  for (auto& blk : st.blocks) blk.collect(out);
}

template <typename T>
void Encoder<T>::collect(ParamList<T>& out) {
  for (std::size_t i = 0; i < stages_.size(); ++i) collect_stage(i, out);
}

// ---------------------------------------------------------------- Decoder

template <typename T>
Decoder<T>::Decoder(const AutoencoderSpec& spec, const std::vector<int>& lengths,
                    std::mt19937_64& init_rng)
    : out_channels_(spec.in_channels) {
  const std::size_t n = spec.stage_channels.size();
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t enc = n - 1 - s;  // encoder stage being mirrored
    const int ch = spec.stage_channels[enc];
    const int out_ch = enc > 0 ? spec.stage_channels[enc - 1] : spec.in_channels;
    const int kernel = down_kernel(enc);
    const int in_len = lengths[enc + 1];
    const int target = lengths[enc];
    const int output_pad = target - ((in_len - 1) * kDownStride - 2 * kDownPad + kernel);
    if (output_pad < 0 || output_pad >= kDownStride)
      throw std::invalid_argument("decoder cannot restore length " + std::to_string(target));
    const std::string name = stage_name("decoder", s);
    Stage st;
    for (int b = 0; b < spec.blocks_per_stage; ++b)
      st.blocks.emplace_back(name + ".block" + std::to_string(b), ch, spec.convnext_kernel,
                             spec.expansion, init_rng);
    st.up = ConvTranspose1d<T>(name + ".up", ch, out_ch, kernel, kDownStride, kDownPad,
                               output_pad, init_rng);
    stages_.push_back(std::move(st));
  }
  final_ = Conv1d<T>("decoder.final", spec.in_channels, spec.in_channels, 3, 1, 1, init_rng);
}

template <typename T>
Tensor<T> Decoder<T>::forward(const Tensor<T>& featmap) {
  Tensor<T> h = featmap;
  for (auto& st : stages_) {
    for (auto& blk : st.blocks) h = blk.forward(h);
    h = st.up.forward(h);
  }
  return swap_last_two(final_.forward(h));
}

template <typename T>
Tensor<T> Decoder<T>::backward(const Tensor<T>& d_out, bool need_input_grad) {
  Tensor<T> g = final_.backward(swap_last_two(d_out));
  for (std::size_t s = stages_.size(); s-- > 0;) {
    const bool first = s == 0;
    g = stages_[s].up.backward(g, !first || need_input_grad || !stages_[s].blocks.empty());
    for (std::size_t k = stages_[s].blocks.size(); k-- > 0;)
      g = stages_[s].blocks[k].backward(g, !(first && k == 0) || need_input_grad);
  }
  return g;
}

template <typename T>
void Decoder<T>::collect(ParamList<T>& out) {
  for (auto& st : stages_) {
    for (auto& blk : st.blocks) blk.collect(out);
    st.up.collect(out);
  }
  final_.collect(out);
}

// ---------------------------------------------------------------- heads

template <typename T>
DomainClassifier<T>::DomainClassifier(int in_dim, const DomainClassifierSpec& spec,
                                      std::mt19937_64& rng) {
  if (spec.hidden.size() != 2)
    throw std::invalid_argument("domain classifier needs exactly two hidden layers");
  fc1_ = Linear<T>("domain.fc1", in_dim, spec.hidden[0], rng);
  fc2_ = Linear<T>("domain.fc2", spec.hidden[0], spec.hidden[1], rng);
  out_ = Linear<T>("domain.out", spec.hidden[1], 1, rng);
}

template <typename T>
Tensor<T> DomainClassifier<T>::forward(const Tensor<T>& embedding, T lambda) {
  grl_.set_lambda(lambda);
  Tensor<T> z = out_.forward(act2_.forward(fc2_.forward(act1_.forward(
      fc1_.forward(grl_.forward(embedding))))));
  for (auto& v : z.values()) v = T(1) / (T(1) + std::exp(-v));
  prob_ = z;
  return z;
}

template <typename T>
Tensor<T> DomainClassifier<T>::backward(const Tensor<T>& d_prob) {
  Tensor<T> dz(d_prob.shape());
  for (std::size_t i = 0; i < dz.size(); ++i) dz[i] = d_prob[i] * prob_[i] * (T(1) - prob_[i]);
  Tensor<T> g = fc1_.backward(act1_.backward(fc2_.backward(act2_.backward(out_.backward(dz)))));
  return grl_.backward(g);
}

template <typename T>
void DomainClassifier<T>::collect(ParamList<T>& out) {
  fc1_.collect(out);
  fc2_.collect(out);
  out_.collect(out);
}

// ---------------------------------------------------------------- Localizer

template <typename T>
Localizer<T>::Localizer(const AutoencoderSpec& spec, std::uint64_t seed,
                        const DomainClassifierSpec& dspec)
    : spec_(spec),
      init_rng_(seed),
      encoder_(spec, init_rng_),
      decoder_(spec, encoder_.lengths(), init_rng_),
      domain_(spec.embedding_dim(), dspec, init_rng_),
      head_(spec.embedding_dim(), 2, init_rng_),
      noise_rng_(seed ^ 0x9e3779b97f4a7c15ull) {}

template <typename T>
ParamList<T> Localizer<T>::autoencoder_parameters() {
  ParamList<T> ps;
  encoder_.collect(ps);
  decoder_.collect(ps);
  return ps;
}

template <typename T>
ParamList<T> Localizer<T>::parameters() {
  ParamList<T> ps = autoencoder_parameters();
  domain_.collect(ps);
  head_.collect(ps);
  return ps;
}

template <typename T>
void Localizer<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template <typename T>
Tensor<T> Localizer<T>::embed(const Tensor<T>& x) {
  return encoder_.forward(x, false, noise_rng_).embedding;
}

template <typename T>
Tensor<T> Localizer<T>::reconstruct(const Tensor<T>& x) {
  return decoder_.forward(encoder_.forward(x, false, noise_rng_).featmap);
}

template <typename T>
Tensor<T> Localizer<T>::predict(const Tensor<T>& x) {
  return head_.forward(embed(x));
}

// ---------------------------------------------------------------- SimpleNN

template <typename T>
SimpleNN<T>::SimpleNN(int in_dim, int width, int blocks, int out_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  stem_ = Linear<T>("stem", in_dim, width, rng);
  for (int i = 0; i < blocks; ++i)
    blocks_.push_back({Linear<T>("block" + std::to_string(i), width, width, rng), Relu<T>()});
  head_ = Linear<T>("head", width, out_dim, rng);
}

template <typename T>
Tensor<T> SimpleNN<T>::forward(const Tensor<T>& x) {
  Tensor<T> h = stem_.forward(x);
  for (auto& blk : blocks_) {
    Tensor<T> r = blk.act.forward(blk.fc.forward(h));
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += r[i];
  }
  return head_.forward(h);
}

template <typename T>
void SimpleNN<T>::backward(const Tensor<T>& d_out) {
  Tensor<T> g = head_.backward(d_out);
  for (std::size_t k = blocks_.size(); k-- > 0;) {
    Tensor<T> gr = blocks_[k].fc.backward(blocks_[k].act.backward(g));
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gr[i];
  }
  stem_.backward(g, false);
}

template <typename T>
ParamList<T> SimpleNN<T>::parameters() {
  ParamList<T> ps;
  stem_.collect(ps);
  for (auto& blk : blocks_) blk.fc.collect(ps);
  head_.collect(ps);
  return ps;
}

template <typename T>
void SimpleNN<T>::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

template class Encoder<float>;
template class Encoder<double>;
template class Decoder<float>;
template class Decoder<double>;
template class DomainClassifier<float>;
template class DomainClassifier<double>;
template class Localizer<float>;
template class Localizer<double>;
template class SimpleNN<float>;
template class SimpleNN<double>;

}  // namespace nn

std::size_t autoencoder_param_count(const AutoencoderSpec& spec) {
  std::mt19937_64 rng(0);
  nn::Encoder<float> enc(spec, rng);
  nn::Decoder<float> dec(spec, enc.lengths(), rng);
  nn::ParamList<float> ps;
  enc.collect(ps);
  dec.collect(ps);
  return nn::count_params(ps);
}

std::size_t domain_classifier_param_count(int in_dim, const DomainClassifierSpec& spec) {
  std::mt19937_64 rng(0);
  nn::DomainClassifier<float> dc(in_dim, spec, rng);
  nn::ParamList<float> ps;
  dc.collect(ps);
  return nn::count_params(ps);
}

std::size_t regression_head_param_count(int in_dim, int out_dim) {
  std::mt19937_64 rng(0);
  nn::RegressionHead<float> head(in_dim, out_dim, rng);
  nn::ParamList<float> ps;
  head.collect(ps);
  return nn::count_params(ps);
}

}  // namespace jamloc
