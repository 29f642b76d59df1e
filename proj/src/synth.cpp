#include "yun/synth.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "yun/errors.hpp"
#include "yun/rng.hpp"

namespace yun {

void SyntheticSpec::validate() const {
  if (num_users < 1) throw ValidationError("synthetic: num_users must be >= 1");
  bool any = false;
  for (double s : signal) {
    if (!(s >= 0.0 && s <= 1.0)) throw ValidationError("synthetic: signal strengths must be in [0, 1]");
    any = any || s > 0.0;
  }
  if (!any) throw ValidationError("synthetic: at least one view needs a nonzero signal");
  if (vocab_size < 1 || tokens_per_class < 1 || hubs_per_community < 1 || noise_accounts < 1)
    throw ValidationError("synthetic: vocabulary, token, hub and account counts must be >= 1");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) throw ValidationError("synthetic: missing_rate must be in [0, 1]");
  for (const auto* priors : {&type_priors, &motivation_priors}) {
    double total = 0.0;
    for (double p : *priors) {
      if (!(p >= 0.0)) throw ValidationError("synthetic: class priors must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) throw ValidationError("synthetic: class priors must sum to 1");
  }
}

namespace {

std::string name(const char* fmt, std::size_t a, std::size_t b = 0, std::size_t c = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b, c);
  return buf;
}

std::size_t draw_class(Rng& rng, const std::array<double, kNumClasses>& priors) {
  double u = rng.uniform();
  for (std::size_t c = 0; c + 1 < kNumClasses; ++c) {
    if (u < priors[c]) return c;
    u -= priors[c];
  }
  return kNumClasses - 1;
}

struct Planted {
  std::size_t type = 0;
  std::size_t motivation = 0;
  std::array<bool, 4> informative{};
  std::size_t community() const { return type * kNumClasses + motivation; }
};

void insert_at_random(std::vector<std::string>& words, std::string token, Rng& rng) {
  const std::size_t pos = rng.below(words.size() + 1);
  words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), std::move(token));
}

std::string sentence(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

std::vector<UserRecord> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed, 0x5e7);
  const std::size_t n = spec.num_users;
  const std::size_t k = spec.tokens_per_class;

  std::vector<Planted> planted(n);
  for (auto& p : planted) {
    p.type = draw_class(rng, spec.type_priors);
    p.motivation = draw_class(rng, spec.motivation_priors);
    for (std::size_t v = 0; v < 4; ++v) p.informative[v] = rng.bernoulli(spec.signal[v]);
  }

  std::vector<std::vector<std::size_t>> community_members(kNumClasses * kNumClasses);
  for (std::size_t i = 0; i < n; ++i)
    if (planted[i].informative[3]) community_members[planted[i].community()].push_back(i);

  auto filler = [&](std::size_t count) {
    std::vector<std::string> words;
    for (std::size_t j = 0; j < count; ++j) words.push_back(name("w%zu", rng.below(spec.vocab_size)));
    return words;
  };

  std::vector<UserRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Planted& p = planted[i];
    UserRecord& r = out[i];
    r.user_id = name("u%05zu", i);
    r.type_label = static_cast<UserType>(p.type);
    r.motivation_label = static_cast<Motivation>(p.motivation);

    // Description
    if (p.informative[0] || !rng.bernoulli(spec.missing_rate)) {
      auto words = filler(5 + rng.below(6));
      if (p.informative[0]) {
        for (int j = 0; j < 2; ++j) {
          insert_at_random(words, name("dty%zuk%zu", p.type, rng.below(k)), rng);
          insert_at_random(words, name("dmo%zuk%zu", p.motivation, rng.below(k)), rng);
        }
      }
      if (rng.bernoulli(0.3)) insert_at_random(words, "\xF0\x9F\xA7\x98", rng);  // person in lotus position
      if (rng.bernoulli(0.5)) words.front()[0] = static_cast<char>(std::toupper(words.front()[0]));
      r.description = sentence(words);
    }

    // Location
    if (p.informative[1]) {
      std::vector<std::string> words{name("lty%zuk%zu", p.type, rng.below(k)), name("lmo%zuk%zu", p.motivation, rng.below(k))};
      if (rng.bernoulli(0.5)) insert_at_random(words, name("city%zu", rng.below(30)), rng);
      r.location = sentence(words);
    } else if (!rng.bernoulli(spec.missing_rate)) {
      std::vector<std::string> words{name("City%zu", rng.below(30))};
      if (rng.bernoulli(0.5)) words.push_back(name("region%zu", rng.below(10)));
      r.location = sentence(words);
    }

    // Tweets
    const std::size_t num_tweets = 3 + rng.below(3);
    for (std::size_t t = 0; t < num_tweets; ++t) {
      auto words = filler(4 + rng.below(5));
      if (p.informative[2]) {
        if (t == 0 || rng.bernoulli(0.6)) insert_at_random(words, name("tty%zuk%zu", p.type, rng.below(k)), rng);
        if (t == 0 || rng.bernoulli(0.6)) insert_at_random(words, name("tmo%zuk%zu", p.motivation, rng.below(k)), rng);
      }
      words.push_back("#yoga");
      if (rng.bernoulli(0.3)) words.push_back(name("https://t.co/x%zu", rng.below(1000)));
      if (rng.bernoulli(0.2)) words.push_back("\xE2\x9C\xA8");  // sparkles
      r.tweets.push_back(sentence(words));
    }

    // Mentions
    if (p.informative[3]) {
      const std::size_t c = p.community();
      for (std::size_t h = 0; h < spec.hubs_per_community; ++h)
        if (h == 0 || rng.bernoulli(0.5)) r.mentioned_ids.push_back(name("hub%zu_%zu_%zu", p.type, p.motivation, h));
      const auto& members = community_members[c];
      for (std::size_t m = 0; m < spec.community_mentions && members.size() > 1; ++m) {
        const std::size_t other = members[rng.below(members.size())];
        if (other != i) r.mentioned_ids.push_back(name("u%05zu", other));
      }
    } else {
      const std::size_t count = 1 + rng.below(3);
      for (std::size_t m = 0; m < count; ++m) r.mentioned_ids.push_back(name("acct%zu", rng.below(spec.noise_accounts)));
    }
  }
  return out;
}

}  // namespace yun
