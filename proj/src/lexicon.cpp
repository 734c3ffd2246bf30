// SPDX-License-Identifier: Apache-2.0
#include "vidcap/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace vidcap {

namespace {

// Porter 1980, implemented on a working buffer b_[0..k_] with the stem
// pointer j_ set by ends(). Rule lists follow the published algorithm.
class PorterStemmer {
  public:
    explicit PorterStemmer(std::string w) : b_(std::move(w)), k_(static_cast<int>(b_.size()) - 1) {}

    std::string run() {
        if (k_ <= 1) return b_;
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        return b_.substr(0, k_ + 1);
    }

  private:
    std::string b_;
    int k_;
    int j_ = 0;

    bool cons(int i) const {
        switch (b_[i]) {
            case 'a':
            case 'e':
            case 'i':
            case 'o':
            case 'u':
                return false;
            case 'y':
                return (i == 0) ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of vowel-consonant sequences in b_[0..j_].
    int m() const {
        int n = 0;
        int i = 0;
        while (true) {
            if (i > j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i > j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i > j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (int i = 0; i <= j_; ++i) {
            if (!cons(i)) return true;
        }
        return false;
    }

    bool doublec(int j) const {
        if (j < 1) return false;
        if (b_[j] != b_[j - 1]) return false;
        return cons(j);
    }

    // consonant-vowel-consonant ending at i, final consonant not w/x/y.
    bool cvc(int i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        const char ch = b_[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(const char* s) {
        const int len = static_cast<int>(std::strlen(s));
        if (len > k_ + 1) return false;
        if (b_.compare(k_ - len + 1, len, s) != 0) return false;
        j_ = k_ - len;
        return true;
    }

    void setto(const char* s) {
        b_ = b_.substr(0, j_ + 1) + s;
        k_ = static_cast<int>(b_.size()) - 1;
    }

    void r(const char* s) {
        if (m() > 0) setto(s);
    }

    void step1ab() {
        if (b_[k_] == 's') {
            if (ends("sses")) {
                k_ -= 2;
            } else if (ends("ies")) {
                setto("i");
            } else if (k_ >= 1 && b_[k_ - 1] != 's') {
                --k_;
            }
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) {
                setto("ate");
            } else if (ends("bl")) {
                setto("ble");
            } else if (ends("iz")) {
                setto("ize");
            } else if (doublec(k_)) {
                --k_;
                const char ch = b_[k_];
                if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
            } else if (m() == 1 && cvc(k_)) {
                setto("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[k_] = 'i';
    }

    void step2() {
        if (k_ < 1) return;
        switch (b_[k_ - 1]) {
            case 'a':
                if (ends("ational")) { r("ate"); break; }
                if (ends("tional")) { r("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { r("ence"); break; }
                if (ends("anci")) { r("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { r("ize"); break; }
                break;
            case 'l':
                if (ends("abli")) { r("able"); break; }
                if (ends("alli")) { r("al"); break; }
                if (ends("entli")) { r("ent"); break; }
                if (ends("eli")) { r("e"); break; }
                if (ends("ousli")) { r("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { r("ize"); break; }
                if (ends("ation")) { r("ate"); break; }
                if (ends("ator")) { r("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { r("al"); break; }
                if (ends("iveness")) { r("ive"); break; }
                if (ends("fulness")) { r("ful"); break; }
                if (ends("ousness")) { r("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { r("al"); break; }
                if (ends("iviti")) { r("ive"); break; }
                if (ends("biliti")) { r("ble"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (b_[k_]) {
            case 'e':
                if (ends("icate")) { r("ic"); break; }
                if (ends("ative")) { r(""); break; }
                if (ends("alize")) { r("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { r("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { r("ic"); break; }
                if (ends("ful")) { r(""); break; }
                break;
            case 's':
                if (ends("ness")) { r(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (k_ < 1) return;
        switch (b_[k_ - 1]) {
            case 'a':
                if (ends("al")) break;
                return;
            case 'c':
                if (ends("ance")) break;
                if (ends("ence")) break;
                return;
            case 'e':
                if (ends("er")) break;
                return;
            case 'i':
                if (ends("ic")) break;
                return;
            case 'l':
                if (ends("able")) break;
                if (ends("ible")) break;
                return;
            case 'n':
                if (ends("ant")) break;
                if (ends("ement")) break;
                if (ends("ment")) break;
                if (ends("ent")) break;
                return;
            case 'o':
                if (ends("ion") && j_ >= 0 && (b_[j_] == 's' || b_[j_] == 't')) break;
                if (ends("ou")) break;
                return;
            case 's':
                if (ends("ism")) break;
                return;
            case 't':
                if (ends("ate")) break;
                if (ends("iti")) break;
                return;
            case 'u':
                if (ends("ous")) break;
                return;
            case 'v':
                if (ends("ive")) break;
                return;
            case 'z':
                if (ends("ize")) break;
                return;
            default:
                return;
        }
        if (m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (b_[k_] == 'e') {
            const int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
        }
        if (b_[k_] == 'l' && doublec(k_) && m() > 1) --k_;
    }
};

bool is_lower_alpha(const std::string& w) {
    return !w.empty() && std::all_of(w.begin(), w.end(),
                                     [](unsigned char c) { return c >= 'a' && c <= 'z'; });
}

bool ends_with(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

const std::set<std::string>& articles() {
    static const std::set<std::string> kArticles = {"a", "an", "the"};
    return kArticles;
}

bool verb_suffix(const std::string& tok) {
    return ends_with(tok, "ing") || ends_with(tok, "ed") ||
           (tok.size() > 1 && tok.back() == 's');
}

}  // namespace

std::string porter_stem(const std::string& word) {
    if (!is_lower_alpha(word)) return word;
    return PorterStemmer(word).run();
}

std::vector<std::string> tokenize(const std::string& caption) {
    std::vector<std::string> out;
    std::size_t i = 0;
    const std::size_t n = caption.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(caption[i]))) ++i;
        std::size_t begin = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(caption[i]))) ++i;
        if (i == begin) continue;
        std::string tok = caption.substr(begin, i - begin);
        for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        std::size_t b = 0, e = tok.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
        if (e > b) out.push_back(tok.substr(b, e - b));
    }
    return out;
}

std::set<std::string> Lexica::default_stop_verbs() {
    static const char* kForms[] = {"be",   "is",    "are",  "am",    "was",    "were",  "been",
                                   "being", "do",   "does", "did",   "done",   "doing", "have",
                                   "has",  "had",   "having", "will", "would", "can",   "could",
                                   "shall", "should", "may", "might", "must"};
    std::set<std::string> stems;
    for (const char* f : kForms) stems.insert(porter_stem(f));
    return stems;
}

void Lexica::save(const std::string& objects_path, const std::string& actions_path) const {
    auto dump = [](const std::string& path, const std::set<std::string>& terms) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("lexicon: cannot write " + path);
        for (const auto& t : terms) out << t << "\n";
    };
    dump(objects_path, objects);
    dump(actions_path, actions);
}

Lexica Lexica::load(const std::string& objects_path, const std::string& actions_path) {
    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("lexicon: cannot open " + path);
        std::set<std::string> terms;
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
            if (!line.empty()) terms.insert(porter_stem(line));
        }
        return terms;
    };
    Lexica lex;
    lex.objects = slurp(objects_path);
    lex.actions = slurp(actions_path);
    lex.stop_verbs = default_stop_verbs();
    for (const auto& sv : lex.stop_verbs) lex.actions.erase(sv);
    return lex;
}

Lexica build_lexica(const std::vector<std::string>& captions,
                    const std::set<std::string>& object_seeds,
                    const std::set<std::string>& action_seeds) {
    if (captions.empty()) throw std::invalid_argument("lexicon: empty caption corpus");
    Lexica lex;
    lex.stop_verbs = Lexica::default_stop_verbs();
    for (const auto& caption : captions) {
        const auto tokens = tokenize(caption);
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& tok = tokens[i];
            if (articles().count(tok)) continue;
            const std::string stem = porter_stem(tok);
            if (lex.stop_verbs.count(stem)) continue;
            const bool after_stop =
                i > 0 && lex.stop_verbs.count(porter_stem(tokens[i - 1])) > 0;
            const bool verb_position = after_stop || ends_with(tok, "ing");
            if (verb_position && verb_suffix(tok)) {
                lex.actions.insert(stem);
            } else if (i > 0 && articles().count(tokens[i - 1])) {
                lex.objects.insert(stem);
            }
        }
    }
    for (const auto& s : object_seeds) lex.objects.insert(porter_stem(s));
    for (const auto& s : action_seeds) {
        const std::string stem = porter_stem(s);
        if (!lex.stop_verbs.count(stem)) lex.actions.insert(stem);
    }
    return lex;
}

TermLists extract_terms(const std::string& caption, const Lexica& lexica) {
    TermLists out;
    const auto tokens = tokenize(caption);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const std::string& tok = tokens[i];
        const std::string stem = porter_stem(tok);
        const bool after_stop =
            i > 0 && lexica.stop_verbs.count(porter_stem(tokens[i - 1])) > 0;
        const bool verb_position = after_stop || ends_with(tok, "ing");
        if (verb_position && lexica.actions.count(stem)) {
            out.actions.push_back(stem);
        } else if (lexica.objects.count(stem)) {
            out.objects.push_back(stem);
        }
    }
    return out;
}

std::map<std::string, ReferenceSet> build_reference_sets(
    const std::map<std::string, std::vector<std::string>>& refs_by_video, const Lexica& lexica) {
    std::map<std::string, ReferenceSet> out;
    for (const auto& [video_id, refs] : refs_by_video) {
        if (refs.empty()) {
            throw std::invalid_argument("lexicon: video '" + video_id + "' has no references");
        }
        ReferenceSet rs;
        rs.video_id = video_id;
        double total_len = 0.0;
        for (const auto& caption : refs) {
            total_len += static_cast<double>(tokenize(caption).size());
            const TermLists terms = extract_terms(caption, lexica);
            rs.object_stems.insert(terms.objects.begin(), terms.objects.end());
            rs.action_stems.insert(terms.actions.begin(), terms.actions.end());
        }
        rs.mean_len = total_len / static_cast<double>(refs.size());
        out.emplace(video_id, std::move(rs));
    }
    return out;
}

}  // namespace vidcap
