#include "itscale/config_file.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <string>

namespace itscale {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("config: cannot parse value '" + std::string(text) + "' for key '" +
                                    std::string(key) + "'");
    }
    return value;
}

}  // namespace

void apply_model_setting(ModelConfig& config, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "d") config.d = parse_number<int>(key, value);
    else if (key == "n") config.n = parse_number<int>(key, value);
    else if (key == "S") config.S = parse_number<double>(key, value);
    else if (key == "sigma") config.sigma = parse_number<double>(key, value);
    else if (key == "gamma") config.gamma = parse_number<double>(key, value);
    else if (key == "tau") config.tau = parse_number<double>(key, value);
    else if (key == "teacher_mode") config.teacher_mode = parse_teacher_mode(value);
    else throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
}

ModelConfig load_model_config(const std::filesystem::path& path, ModelConfig base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_model_setting(base, view.substr(0, eq), view.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.validate();
    return base;
}

}  // namespace itscale
