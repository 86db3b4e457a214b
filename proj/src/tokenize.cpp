#include "gqr/tokenize.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace gqr {

namespace {

const std::unordered_set<std::string>& stopword_set() {
    static const std::unordered_set<std::string> words = {
        "a",    "an",   "and",  "are",  "as",   "at",   "be",   "by",
        "for",  "from", "has",  "he",   "in",   "is",   "it",   "its",
        "of",   "on",   "or",   "that", "the",  "to",   "was",  "were",
        "will", "with", "this", "they", "them", "she",  "his",  "her",
        "we",   "you",  "your", "not",  "but",  "had",  "have", "what",
        "which"};
    return words;
}

bool is_alnum(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9');
}

char lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                  : static_cast<char>(c);
}

// --- Porter stemmer ------------------------------------------------------
//
// Direct port of the reference algorithm. `word` is mutated in place; `end`
// tracks the logical end of the stem while suffix rules are applied.

class Porter {
public:
    explicit Porter(std::string w) : b_(std::move(w)), k_(b_.size()) {}

    std::string run() {
        if (k_ <= 2) return b_; // length-2 words are left alone
        step1ab();
        step1c();
        step2();
        step3();
        step4();
        step5();
        b_.resize(k_);
        return b_;
    }

private:
    std::string b_;
    std::size_t k_; // one past the last letter of the current stem
    std::size_t j_ = 0;

    bool cons(std::size_t i) const {
        switch (b_[i]) {
            case 'a': case 'e': case 'i': case 'o': case 'u':
                return false;
            case 'y':
                return i == 0 ? true : !cons(i - 1);
            default:
                return true;
        }
    }

    // Number of consonant-vowel sequences in [0, j_).
    int m() const {
        int n = 0;
        std::size_t i = 0;
        while (true) {
            if (i >= j_) return n;
            if (!cons(i)) break;
            ++i;
        }
        ++i;
        while (true) {
            while (true) {
                if (i >= j_) return n;
                if (cons(i)) break;
                ++i;
            }
            ++i;
            ++n;
            while (true) {
                if (i >= j_) return n;
                if (!cons(i)) break;
                ++i;
            }
            ++i;
        }
    }

    bool vowel_in_stem() const {
        for (std::size_t i = 0; i < j_; ++i)
            if (!cons(i)) return true;
        return false;
    }

    bool double_cons(std::size_t i) const {
        if (i < 1) return false;
        if (b_[i] != b_[i - 1]) return false;
        return cons(i);
    }

    // consonant - vowel - consonant, where the final consonant is not w, x, y.
    bool cvc(std::size_t i) const {
        if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
        char ch = b_[i];
        return ch != 'w' && ch != 'x' && ch != 'y';
    }

    bool ends(std::string_view s) {
        if (s.size() > k_) return false;
        if (b_.compare(k_ - s.size(), s.size(), s) != 0) return false;
        j_ = k_ - s.size();
        return true;
    }

    void set_to(std::string_view s) {
        b_.replace(j_, k_ - j_, s);
        k_ = j_ + s.size();
    }

    void replace_if_m(std::string_view s) {
        if (m() > 0) set_to(s);
    }

    void step1ab() {
        if (b_[k_ - 1] == 's') {
            if (ends("sses")) k_ -= 2;
            else if (ends("ies")) set_to("i");
            else if (b_[k_ - 2] != 's') --k_;
        }
        if (ends("eed")) {
            if (m() > 0) --k_;
        } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
            k_ = j_;
            if (ends("at")) set_to("ate");
            else if (ends("bl")) set_to("ble");
            else if (ends("iz")) set_to("ize");
            else if (double_cons(k_ - 1)) {
                char ch = b_[k_ - 1];
                if (ch != 'l' && ch != 's' && ch != 'z') --k_;
            } else if (m() == 1 && cvc(k_ - 1)) {
                j_ = k_;
                set_to("e");
            }
        }
    }

    void step1c() {
        if (ends("y") && vowel_in_stem()) b_[k_ - 1] = 'i';
    }

    void step2() {
        if (k_ < 2) return;
        switch (b_[k_ - 2]) {
            case 'a':
                if (ends("ational")) { replace_if_m("ate"); break; }
                if (ends("tional")) { replace_if_m("tion"); break; }
                break;
            case 'c':
                if (ends("enci")) { replace_if_m("ence"); break; }
                if (ends("anci")) { replace_if_m("ance"); break; }
                break;
            case 'e':
                if (ends("izer")) { replace_if_m("ize"); break; }
                break;
            case 'l':
                if (ends("bli")) { replace_if_m("ble"); break; }
                if (ends("alli")) { replace_if_m("al"); break; }
                if (ends("entli")) { replace_if_m("ent"); break; }
                if (ends("eli")) { replace_if_m("e"); break; }
                if (ends("ousli")) { replace_if_m("ous"); break; }
                break;
            case 'o':
                if (ends("ization")) { replace_if_m("ize"); break; }
                if (ends("ation")) { replace_if_m("ate"); break; }
                if (ends("ator")) { replace_if_m("ate"); break; }
                break;
            case 's':
                if (ends("alism")) { replace_if_m("al"); break; }
                if (ends("iveness")) { replace_if_m("ive"); break; }
                if (ends("fulness")) { replace_if_m("ful"); break; }
                if (ends("ousness")) { replace_if_m("ous"); break; }
                break;
            case 't':
                if (ends("aliti")) { replace_if_m("al"); break; }
                if (ends("iviti")) { replace_if_m("ive"); break; }
                if (ends("biliti")) { replace_if_m("ble"); break; }
                break;
            case 'g':
                if (ends("logi")) { replace_if_m("log"); break; }
                break;
            default:
                break;
        }
    }

    void step3() {
        switch (b_[k_ - 1]) {
            case 'e':
                if (ends("icate")) { replace_if_m("ic"); break; }
                if (ends("ative")) { replace_if_m(""); break; }
                if (ends("alize")) { replace_if_m("al"); break; }
                break;
            case 'i':
                if (ends("iciti")) { replace_if_m("ic"); break; }
                break;
            case 'l':
                if (ends("ical")) { replace_if_m("ic"); break; }
                if (ends("ful")) { replace_if_m(""); break; }
                break;
            case 's':
                if (ends("ness")) { replace_if_m(""); break; }
                break;
            default:
                break;
        }
    }

    void step4() {
        if (k_ < 2) return;
        switch (b_[k_ - 2]) {
            case 'a': if (ends("al")) break; return;
            case 'c': if (ends("ance") || ends("ence")) break; return;
            case 'e': if (ends("er")) break; return;
            case 'i': if (ends("ic")) break; return;
            case 'l': if (ends("able") || ends("ible")) break; return;
            case 'n':
                if (ends("ant") || ends("ement") || ends("ment") || ends("ent"))
                    break;
                return;
            case 'o':
                if (ends("ion") && j_ > 0 && (b_[j_ - 1] == 's' || b_[j_ - 1] == 't'))
                    break;
                if (ends("ou")) break;
                return;
            case 's': if (ends("ism")) break; return;
            case 't': if (ends("ate") || ends("iti")) break; return;
            case 'u': if (ends("ous")) break; return;
            case 'v': if (ends("ive")) break; return;
            case 'z': if (ends("ize")) break; return;
            default: return;
        }
        if (m() > 1) k_ = j_;
    }

    void step5() {
        j_ = k_;
        if (b_[k_ - 1] == 'e') {
            int a = m();
            if (a > 1 || (a == 1 && !cvc(k_ - 2))) --k_;
        }
        if (b_[k_ - 1] == 'l' && double_cons(k_ - 1) && m() > 1) --k_;
    }
};

} // namespace

std::string porter_stem(std::string_view word) {
    return Porter(std::string(word)).run();
}

bool is_stopword(std::string_view word) {
    return stopword_set().count(std::string(word)) > 0;
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(lower(c));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), b.end(),
                      [](unsigned char x, unsigned char y) {
                          return lower(x) == lower(y);
                      });
}

std::vector<std::string> tokenize(std::string_view text,
                                  const TokenizeOptions& options) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (!options.remove_stopwords || !is_stopword(current)) {
            tokens.push_back(options.stem ? porter_stem(current) : current);
        }
        current.clear();
    };
    for (unsigned char c : text) {
        if (is_alnum(c)) {
            current.push_back(lower(c));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

} // namespace gqr
