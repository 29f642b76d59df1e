#include "yun/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include "yun/errors.hpp"
#include "yun/rng.hpp"

namespace yun {

namespace {

// NLTK English stopword list.
constexpr std::string_view kStopwords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've", "you'll",
    "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself", "she", "she's",
    "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them", "their", "theirs",
    "themselves", "what", "which", "who", "whom", "this", "that", "that'll", "these", "those", "am", "is",
    "are", "was", "were", "be", "been", "being", "have", "has", "had", "having", "do", "does", "did",
    "doing", "a", "an", "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at",
    "by", "for", "with", "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under", "again",
    "further", "then", "once", "here", "there", "when", "where", "why", "how", "all", "any", "both",
    "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same",
    "so", "than", "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've",
    "now", "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn", "isn't",
    "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't", "shouldn",
    "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn", "wouldn't"};

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    int len = 1;
    char32_t cp = b;
    if (b >= 0xF0 && b < 0xF8) {
      len = 4;
      cp = b & 0x07;
    } else if (b >= 0xE0) {
      len = 3;
      cp = b & 0x0F;
    } else if (b >= 0xC0) {
      len = 2;
      cp = b & 0x1F;
    } else if (b >= 0x80) {
      ++i;  // stray continuation byte
      continue;
    }
    if (i + len > s.size()) break;
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (c & 0x3F);
    }
    i += ok ? len : 1;
    if (ok) out.push_back(cp);
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

char32_t to_lower(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 32;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;  // Latin-1
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;  // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;  // Cyrillic
  return cp;
}

bool is_space(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' || cp == '\v' || cp == 0xA0 ||
         cp == 0x3000 || (cp >= 0x2000 && cp <= 0x200A);
}

// Zero-width joiners and variation selectors glue emoji sequences; they are
// dropped so each emoji code point stands alone.
bool is_joiner(char32_t cp) { return cp == 0x200D || cp == 0xFE0F || cp == 0xFE0E || cp == 0x20E3; }

bool is_word_char(char32_t cp) {
  if (cp < 0x80) return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9') || cp == '_';
  if (is_emoji(cp) || is_space(cp) || is_joiner(cp)) return false;
  // General punctuation, currency, and CJK punctuation blocks are separators.
  if (cp >= 0x2010 && cp <= 0x206F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xA1 && cp <= 0xBF) return false;
  return true;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

}  // namespace

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || (cp >= 0x2300 && cp <= 0x23FF) ||
         (cp >= 0x2B00 && cp <= 0x2BFF) || (cp >= 0x2190 && cp <= 0x21FF) || (cp >= 0x25A0 && cp <= 0x25FF) ||
         cp == 0x00A9 || cp == 0x00AE || cp == 0x203C || cp == 0x2049 || cp == 0x2122 || cp == 0x2139 ||
         cp == 0x24C2 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

const std::set<std::string, std::less<>>& default_stopwords() {
  static const std::set<std::string, std::less<>> words(std::begin(kStopwords), std::end(kStopwords));
  return words;
}

std::set<std::string, std::less<>> load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read stopword file " + path.string());
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    // Tokens are compared after case folding, so the list is folded too.
    std::string folded;
    for (char32_t cp : decode_utf8(line)) append_utf8(folded, to_lower(cp));
    words.insert(folded);
  }
  return words;
}

PreprocessConfig default_preprocess_config() { return PreprocessConfig{default_stopwords(), {}}; }

Tokens preprocess(std::string_view text, const PreprocessConfig& config) {
  static const std::regex url(R"((https?://|www\.)\S*)", std::regex::icase);
  const std::string stripped = std::regex_replace(std::string(text), url, " ");

  std::vector<char32_t> cps = decode_utf8(stripped);
  for (char32_t& cp : cps) cp = to_lower(cp);

  Tokens raw;
  std::string current;
  auto flush = [&] {
    // A bare '#' or '@' carries no content.
    if (!current.empty() && current != "#" && current != "@") raw.push_back(current);
    current.clear();
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (is_emoji(cp)) {
      flush();
      std::string e;
      append_utf8(e, cp);
      raw.push_back(std::move(e));
    } else if (is_word_char(cp)) {
      append_utf8(current, cp);
    } else if ((cp == '#' || cp == '@') && i + 1 < cps.size() && is_word_char(cps[i + 1])) {
      flush();
      current.push_back(static_cast<char>(cp));
    } else if (is_apostrophe(cp) && !current.empty() && current != "#" && current != "@" &&
               i + 1 < cps.size() && is_word_char(cps[i + 1])) {
      current.push_back('\'');
    } else {
      flush();
    }
  }
  flush();

  Tokens out;
  out.reserve(raw.size());
  for (auto& tok : raw) {
    if (config.stopwords.contains(tok)) continue;
    if (config.normalizer) {
      std::string norm = config.normalizer(tok);
      if (!norm.empty()) out.push_back(std::move(norm));
    } else {
      out.push_back(std::move(tok));
    }
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

// Vocabulary

Vocabulary::Vocabulary() {
  add(std::string(kPadToken), 0);
  add(std::string(kUnkToken), 0);
}

void Vocabulary::add(std::string token, std::size_t count) {
  ids_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(std::span<const Tokens> corpus, std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("build_vocab: min_count must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) ++counts[tok];
  if (counts.empty()) throw ValidationError("build_vocab: empty corpus");

  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  // std::map iteration is already lexicographic; stable sort keeps that for ties.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, c] : entries) {
    if (c < min_count) continue;
    if (tok == kPadToken || tok == kUnkToken) continue;
    v.add(tok, c);
  }
  return v;
}

std::size_t Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.contains(std::string(token)); }

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vocabulary " + path.string());
  for (std::size_t i = 0; i < tokens_.size(); ++i) out << tokens_[i] << '\t' << counts_[i] << '\n';
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::vector<std::size_t> counts) {
  if (tokens.size() != counts.size()) throw std::invalid_argument("vocabulary tokens/counts size mismatch");
  if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken)
    throw ValidationError("vocabulary must start with reserved <pad> and <unk> entries");
  Vocabulary v;
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw ValidationError("duplicate vocabulary token '" + tokens[i] + "'");
    v.add(std::move(tokens[i]), counts[i]);
  }
  return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::vector<std::size_t> counts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected token<TAB>count", lineno);
    std::size_t c = 0;
    const char* b = line.data() + tab + 1;
    const char* e = line.data() + line.size();
    auto [p, ec] = std::from_chars(b, e, c);
    if (ec != std::errc() || p != e) throw ParseError("bad count", lineno);
    tokens.push_back(line.substr(0, tab));
    counts.push_back(c);
  }
  return from_tokens(std::move(tokens), std::move(counts));
}

std::vector<std::size_t> encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                                         std::size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("encode_sequence: max_len must be >= 1");
  const std::size_t n = std::min(tokens.size(), max_len);
  std::vector<std::size_t> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ids.push_back(vocab.id(tokens[i]));
  return ids;
}

Tokens decode_sequence(std::span<const std::size_t> ids, const Vocabulary& vocab) {
  Tokens out;
  out.reserve(ids.size());
  for (std::size_t id : ids) out.push_back(vocab.token(id));
  return out;
}

// Embedding tables

EmbeddingTable EmbeddingTable::random(std::size_t vocab_size, std::size_t dim, double scale, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(vocab_size, dim);
  for (std::size_t r = 1; r < vocab_size; ++r)
    for (std::size_t c = 0; c < dim; ++c) t(r, c) = rng.uniform(-scale, scale);
  return EmbeddingTable{Parameter{"embedding", std::move(t), true}};
}

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view s, double& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

bool is_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Calls visit(token, values) for every entry line.
template <typename Visit>
std::size_t scan_vector_file(const std::filesystem::path& path, std::size_t dim, Visit visit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read vector file " + path.string());
  std::string line;
  std::size_t lineno = 0;
  std::size_t entries = 0;
  std::vector<double> values(dim);
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) {
      if (std::stoul(std::string(fields[1])) != dim)
        throw ParseError("header declares dimension " + std::string(fields[1]) + ", expected " +
                             std::to_string(dim),
                         lineno);
      continue;
    }
    if (fields.size() != dim + 1)
      throw ParseError("expected " + std::to_string(dim) + " values, got " + std::to_string(fields.size() - 1),
                       lineno);
    for (std::size_t k = 0; k < dim; ++k)
      if (!parse_double(fields[k + 1], values[k]))
        throw ParseError("bad number '" + std::string(fields[k + 1]) + "'", lineno);
    ++entries;
    visit(fields[0], values);
  }
  return entries;
}

}  // namespace

EmbeddingTable load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim,
                               Coverage* coverage) {
  Tensor t(vocab.size(), dim);
  std::vector<bool> seen(vocab.size(), false);
  const std::size_t entries = scan_vector_file(path, dim, [&](std::string_view tok, const std::vector<double>& v) {
    if (!vocab.contains(tok)) return;
    const std::size_t id = vocab.id(tok);
    if (id == Vocabulary::kPad) return;
    std::copy(v.begin(), v.end(), t.row_span(id).begin());
    seen[id] = true;
  });
  if (coverage) {
    coverage->file_entries = entries;
    coverage->found = static_cast<std::size_t>(std::count(seen.begin() + 2, seen.end(), true));
    coverage->missing = vocab.size() - 2 - coverage->found;
  }
  return EmbeddingTable{Parameter{"embedding", std::move(t), false}};
}

void write_vectors(const std::filesystem::path& path, const std::vector<std::string>& names, const Tensor& matrix) {
  if (names.size() != matrix.rows())
    throw std::invalid_argument("write_vectors: " + std::to_string(names.size()) + " names for " +
                                matrix.shape_string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write vector file " + path.string());
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out << names[r];
    for (double v : matrix.row_span(r)) out << ' ' << format_double(v);
    out << '\n';
  }
}

VectorMap read_vectors(const std::filesystem::path& path, std::size_t dim) {
  VectorMap out;
  scan_vector_file(path, dim, [&](std::string_view tok, const std::vector<double>& v) {
    out[std::string(tok)] = v;
  });
  return out;
}

}  // namespace yun
