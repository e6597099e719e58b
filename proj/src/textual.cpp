#include "blueprint/textual.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <regex>
#include <sstream>

#include "blueprint/image_io.hpp"
#include "blueprint/preprocess.hpp"

namespace bp {

const char* token_class_name(TokenClass c) {
    switch (c) {
        case TokenClass::Position: return "position";
        case TokenClass::Function: return "function";
        case TokenClass::AreaSize: return "area_size";
        case TokenClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

TokenClass token_class_from_name(const std::string& name) {
    if (name == "position") return TokenClass::Position;
    if (name == "function") return TokenClass::Function;
    if (name == "area_size") return TokenClass::AreaSize;
    return TokenClass::Unclassified;
}

namespace {

std::string encode_utf8(char32_t cp) {
    std::string s;
    if (cp < 0x80) {
        s += static_cast<char>(cp);
    } else {
        s += static_cast<char>(0xC0 | (cp >> 6));
        s += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return s;
}

// Normalized correlation of two same-size binary patterns, clamped to [0,1].
double binary_ncc(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    const double n = static_cast<double>(a.size());
    double sa = 0, sb = 0, sab = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        sab += a[i] & b[i];
    }
    const double va = n * sa - sa * sa;
    const double vb = n * sb - sb * sb;
    if (va <= 0 || vb <= 0) {
        // constant pattern: identical means a perfect match, else no evidence
        return (sa == sb && (sa == 0 || sa == n)) ? 1.0 : 0.0;
    }
    const double cov = n * sab - sa * sb;
    return std::max(0.0, cov / std::sqrt(va * vb));
}

std::vector<std::uint8_t> resize_nearest(const std::vector<std::uint8_t>& bits, int w, int h,
                                         int tw, int th) {
    std::vector<std::uint8_t> out(static_cast<std::size_t>(tw) * th);
    for (int y = 0; y < th; ++y) {
        const int sy = std::min(h - 1, y * h / th);
        for (int x = 0; x < tw; ++x) {
            const int sx = std::min(w - 1, x * w / tw);
            out[static_cast<std::size_t>(y) * tw + x] = bits[static_cast<std::size_t>(sy) * w + sx];
        }
    }
    return out;
}

constexpr int kMaxGlyphDim = 72;

struct InkComponent {
    BoundingBox box;
    std::vector<std::uint8_t> bits;  // tight patch, 1 = ink
};

std::vector<InkComponent> ink_components(const RasterImage& gray) {
    const int w = gray.width, h = gray.height;
    std::vector<std::uint8_t> ink(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < ink.size(); ++i) ink[i] = gray.pixels[i] < 128 ? 1 : 0;

    std::vector<std::uint8_t> seen(ink.size(), 0);
    std::vector<InkComponent> comps;
    std::vector<int> stack;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
            if (!ink[si] || seen[si]) continue;
            stack.assign(1, static_cast<int>(si));
            seen[si] = 1;
            std::vector<int> members;
            int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
            while (!stack.empty()) {
                const int idx = stack.back();
                stack.pop_back();
                members.push_back(idx);
                const int x = idx % w, y = idx / w;
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (ink[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            stack.push_back(static_cast<int>(ni));
                        }
                    }
                }
            }
            const int cw = x1 - x0 + 1, ch = y1 - y0 + 1;
            if (cw > kMaxGlyphDim || ch > kMaxGlyphDim) continue;  // walls, rulers, symbols
            InkComponent c;
            c.box = {x0, y0, x1 + 1, y1 + 1};
            c.bits.assign(static_cast<std::size_t>(cw) * ch, 0);
            for (int idx : members) {
                const int x = idx % w, y = idx / w;
                c.bits[static_cast<std::size_t>(y - y0) * cw + (x - x0)] = 1;
            }
            comps.push_back(std::move(c));
        }
    }
    return comps;
}

}  // namespace

GlyphRecognizer::GlyphRecognizer(double min_score)
    : glyphs_(builtin_glyphs()), min_score_(min_score) {}

GlyphRecognizer::GlyphRecognizer(std::vector<Glyph> glyphs, double min_score)
    : glyphs_(std::move(glyphs)), min_score_(min_score) {}

std::vector<TextToken> GlyphRecognizer::recognize(const RasterImage& gray) const {
    const RasterImage* src = &gray;
    RasterImage tmp;
    if (gray.channels != 1) {
        tmp = to_grayscale(gray);
        src = &tmp;
    }
    std::vector<TextToken> tokens;
    for (const InkComponent& comp : ink_components(*src)) {
        const int cw = comp.box.width(), ch = comp.box.height();
        double best = 0.0;
        char32_t best_cp = 0;
        for (const Glyph& g : glyphs_) {
            // reject wildly mismatched shapes before scoring
            const double ar_comp = static_cast<double>(cw) / ch;
            const double ar_glyph = static_cast<double>(g.width) / g.height;
            if (ar_comp > 2.5 * ar_glyph || ar_glyph > 2.5 * ar_comp) continue;
            // compare on the larger common grid; shrinking the glyph onto a
            // tiny component degenerates to an all-ink patch
            const int tw = std::max(cw, g.width), th = std::max(ch, g.height);
            const auto a = resize_nearest(comp.bits, cw, ch, tw, th);
            const auto b = resize_nearest(g.bits, g.width, g.height, tw, th);
            const double s = binary_ncc(a, b);
            if (s > best) {
                best = s;
                best_cp = g.codepoint;
            }
        }
        if (best_cp != 0 && best >= min_score_) {
            tokens.push_back({encode_utf8(best_cp), comp.box, 100.0 * best});
        }
    }
    return tokens;
}

SubprocessRecognizer::SubprocessRecognizer(std::vector<std::string> argv, bool character_level)
    : argv_(std::move(argv)), character_level_(character_level) {
    if (argv_.empty()) throw Error(ErrorKind::RecognizerUnavailable, "empty recognizer command");
}

std::vector<TextToken> SubprocessRecognizer::recognize(const RasterImage& gray) const {
    const std::vector<std::uint8_t> png = encode_png(gray);

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
        throw Error(ErrorKind::RecognizerUnavailable, "pipe failed");
    }
    const pid_t pid = fork();
    if (pid < 0) throw Error(ErrorKind::RecognizerUnavailable, "fork failed");
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(out_pipe[1]);
        std::vector<char*> argv;
        for (const std::string& a : argv_) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);

    std::size_t written = 0;
    while (written < png.size()) {
        const ssize_t n = write(in_pipe[1], png.data() + written, png.size() - written);
        if (n <= 0) break;
        written += static_cast<std::size_t>(n);
    }
    close(in_pipe[1]);

    std::string output;
    char buf[4096];
    ssize_t n;
    while ((n = read(out_pipe[0], buf, sizeof buf)) > 0) output.append(buf, static_cast<std::size_t>(n));
    close(out_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw Error(ErrorKind::RecognizerUnavailable, "recognizer process failed");
    }

    std::vector<TextToken> tokens;
    std::istringstream lines(output);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            const std::size_t tab = line.find('\t', pos);
            fields.push_back(line.substr(pos, tab - pos));
            if (tab == std::string::npos) break;
            pos = tab + 1;
        }
        if (fields.size() < 6) continue;
        try {
            TextToken t;
            t.text = fields[0];
            t.bbox = {std::stoi(fields[1]), std::stoi(fields[2]), std::stoi(fields[3]),
                      std::stoi(fields[4])};
            t.confidence = std::stod(fields[5]);
            if (!t.text.empty() && t.bbox.valid()) tokens.push_back(std::move(t));
        } catch (...) {
            // malformed line, skip
        }
    }
    return tokens;
}

std::vector<TextToken> recognize_characters(const RasterImage& img, const TextRecognizer& r) {
    if (!r.caps().character_level) {
        throw Error(ErrorKind::RecognizerUnavailable, "recognizer has no character-level output");
    }
    std::vector<TextToken> tokens = r.recognize(img);
    std::sort(tokens.begin(), tokens.end(), [](const TextToken& a, const TextToken& b) {
        return std::tie(a.bbox.y0, a.bbox.x0) < std::tie(b.bbox.y0, b.bbox.x0);
    });
    return tokens;
}

namespace {

double vertical_overlap(const BoundingBox& a, const BoundingBox& b) {
    const int ov = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (ov <= 0) return 0.0;
    return static_cast<double>(ov) / std::min(a.height(), b.height());
}

int find_root(std::vector<int>& parent, int i) {
    while (parent[i] != i) {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    return i;
}

/// Clusters tokens by pairwise proximity: members of one cluster overlap
/// vertically by at least half the shorter box and sit within max_gap
/// horizontally. Avoids the chaining that hull-based line growing suffers when
/// distant rooms share a baseline.
std::vector<std::vector<TextToken>> cluster_tokens(const std::vector<TextToken>& tokens,
                                                   int max_gap) {
    const int n = static_cast<int>(tokens.size());
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (vertical_overlap(tokens[i].bbox, tokens[j].bbox) < 0.5) continue;
            const int gap_x = std::max(tokens[i].bbox.x0, tokens[j].bbox.x0) -
                              std::min(tokens[i].bbox.x1, tokens[j].bbox.x1);
            if (gap_x > max_gap) continue;
            parent[find_root(parent, i)] = find_root(parent, j);
        }
    }
    std::vector<std::vector<TextToken>> clusters;
    std::vector<int> cluster_of(n, -1);
    for (int i = 0; i < n; ++i) {
        const int root = find_root(parent, i);
        if (cluster_of[root] < 0) {
            cluster_of[root] = static_cast<int>(clusters.size());
            clusters.emplace_back();
        }
        clusters[cluster_of[root]].push_back(tokens[i]);
    }
    for (auto& c : clusters) {
        std::sort(c.begin(), c.end(), [](const TextToken& a, const TextToken& b) {
            return std::tie(a.bbox.x0, a.bbox.y0) < std::tie(b.bbox.x0, b.bbox.y0);
        });
    }
    return clusters;
}

int median_char_width(const std::vector<TextToken>& tokens) {
    std::vector<int> widths;
    widths.reserve(tokens.size());
    for (const TextToken& t : tokens) widths.push_back(t.bbox.width());
    std::sort(widths.begin(), widths.end());
    return std::max(2, widths[widths.size() / 2]);
}

}  // namespace

std::vector<TextToken> group_words(const std::vector<TextToken>& chars, int gap) {
    if (chars.empty()) return {};
    const int join_gap = gap > 0 ? gap : median_char_width(chars) * 3 / 2;
    std::vector<TextToken> words;
    for (const auto& cluster : cluster_tokens(chars, join_gap)) {
        TextToken cur;
        BoundingBox prev;
        for (const TextToken& t : cluster) {
            if (cur.text.empty()) {
                cur = t;
                prev = t.bbox;
                continue;
            }
            // letter gaps stay under 4 cell units; a blank adds 4 more
            const double unit = std::max(1.0, std::max(prev.height(), t.bbox.height()) / 7.0);
            if (t.bbox.x0 - prev.x1 >= 4.5 * unit) cur.text += ' ';
            cur.text += t.text;
            cur.bbox = BoundingBox::hull(cur.bbox, t.bbox);
            cur.confidence = std::min(cur.confidence, t.confidence);
            prev = t.bbox;
        }
        words.push_back(cur);
    }
    std::sort(words.begin(), words.end(), [](const TextToken& a, const TextToken& b) {
        return std::tie(a.bbox.y0, a.bbox.x0) < std::tie(b.bbox.y0, b.bbox.x0);
    });
    return words;
}

namespace {

const std::regex kNumberRe(R"(^[0-9]+([.,][0-9]+)?$)");
const std::regex kUnitRe(R"(^[mM](2|\?|\xc2\xb2)$)");
const std::regex kAreaRe(R"(^\s*([0-9]+(?:[.,][0-9]+)?)\s*[mM](?:2|\?|\xc2\xb2)\s*$)");
const std::regex kIntegerRe(R"(^[0-9]+$)");

}  // namespace

std::vector<TextToken> merge_area_tokens(const std::vector<TextToken>& words, int max_gap) {
    std::vector<TextToken> out;
    for (const auto& line : cluster_tokens(words, max_gap)) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i + 1 < line.size() && std::regex_match(line[i].text, kNumberRe) &&
                std::regex_match(line[i + 1].text, kUnitRe) &&
                line[i + 1].bbox.x0 - line[i].bbox.x1 <= max_gap) {
                TextToken merged;
                merged.text = line[i].text + " " + line[i + 1].text;
                merged.bbox = BoundingBox::hull(line[i].bbox, line[i + 1].bbox);
                merged.confidence = std::min(line[i].confidence, line[i + 1].confidence);
                out.push_back(std::move(merged));
                ++i;
            } else {
                out.push_back(line[i]);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const TextToken& a, const TextToken& b) {
        return std::tie(a.bbox.y0, a.bbox.x0) < std::tie(b.bbox.y0, b.bbox.x0);
    });
    return out;
}

std::vector<std::string> default_function_dictionary() {
    return {"KITCHEN", "BATH",   "BEDROOM",  "DINING", "DINING AREA", "LIVING",
            "HALL",    "WC",     "CLOSET",   "ENTRANCE", "STAIRS"};
}

std::vector<std::pair<TextToken, TokenClass>> classify_tokens(
    const std::vector<TextToken>& words, const std::vector<std::string>& dictionary) {
    std::vector<std::pair<TextToken, TokenClass>> out;
    out.reserve(words.size());
    for (const TextToken& w : words) {
        std::string upper = w.text;
        for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));

        TokenClass cls = TokenClass::Unclassified;
        if (std::find(dictionary.begin(), dictionary.end(), upper) != dictionary.end()) {
            cls = TokenClass::Function;
        } else if (std::regex_match(w.text, kAreaRe)) {
            cls = TokenClass::AreaSize;
        } else if (std::regex_match(upper, kIntegerRe)) {
            cls = TokenClass::Position;
        } else {
            // short alphanumeric room code, e.g. "1A"
            bool alnum = !upper.empty() && upper.size() <= 4;
            bool has_digit = false;
            for (char c : upper) {
                if (!std::isalnum(static_cast<unsigned char>(c))) alnum = false;
                if (std::isdigit(static_cast<unsigned char>(c))) has_digit = true;
            }
            if (alnum && has_digit) cls = TokenClass::Position;
        }
        out.emplace_back(w, cls);
    }
    return out;
}

double parse_area_label(const std::string& text) {
    std::smatch m;
    if (!std::regex_match(text, m, kAreaRe)) {
        throw Error(ErrorKind::NotAnArea, "'" + text + "' is not an area label");
    }
    std::string num = m[1].str();
    std::replace(num.begin(), num.end(), ',', '.');
    return std::stod(num);
}

}  // namespace bp
