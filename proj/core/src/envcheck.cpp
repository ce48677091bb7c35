#include "benchlab/envcheck.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/utsname.h>

#include "benchlab/runner.hpp"

namespace benchlab {

const char* const kToolVersion = "benchlab 0.1.0";

namespace {

namespace fs = std::filesystem;

std::optional<std::string> read_first_line(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r' || line.back() == ' '))
        line.pop_back();
    return line;
}

std::optional<long> read_long(const fs::path& path) {
    const auto line = read_first_line(path);
    if (!line) return std::nullopt;
    try {
        return std::stol(*line);
    } catch (...) {
        return std::nullopt;
    }
}

std::string cpu_model_name() {
    std::ifstream in("/proc/cpuinfo");
    std::string line;
    while (std::getline(in, line)) {
        const auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        if (line.rfind("model name", 0) == 0) {
            std::string value = line.substr(colon + 1);
            const auto first = value.find_first_not_of(" \t");
            return first == std::string::npos ? "" : value.substr(first);
        }
    }
    return "unknown cpu";
}

std::optional<bool> probe_turbo() {
    // intel_pstate exposes no_turbo (1 = disabled); acpi-cpufreq exposes boost.
    if (const auto v = read_long("/sys/devices/system/cpu/intel_pstate/no_turbo"))
        return *v == 0;
    if (const auto v = read_long("/sys/devices/system/cpu/cpufreq/boost")) return *v != 0;
    return std::nullopt;
}

std::optional<bool> probe_frequency_fixed() {
    const auto min =
        read_long("/sys/devices/system/cpu/cpu0/cpufreq/scaling_min_freq");
    const auto max =
        read_long("/sys/devices/system/cpu/cpu0/cpufreq/scaling_max_freq");
    if (min && max) return *min == *max;
    return std::nullopt;
}

std::optional<bool> probe_ac_power() {
    const fs::path root("/sys/class/power_supply");
    std::error_code ec;
    if (!fs::is_directory(root, ec)) return std::nullopt;

    bool saw_battery = false;
    std::optional<bool> mains_online;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        const auto type = read_first_line(entry.path() / "type");
        if (!type) continue;
        if (*type == "Battery") saw_battery = true;
        if (*type == "Mains") {
            if (const auto online = read_long(entry.path() / "online"))
                mains_online = *online != 0;
        }
    }
    if (mains_online) return mains_online;
    // No battery present means wall power; with a battery but no readable
    // mains state we genuinely do not know.
    if (!saw_battery) return true;
    return std::nullopt;
}

std::string os_descriptor_string() {
    utsname u{};
    if (uname(&u) != 0) return "unknown os";
    return std::string(u.sysname) + " " + u.release + " " + u.machine;
}

std::string tri_state(const std::optional<bool>& v) {
    if (!v) return "unknown";
    return *v ? "true" : "false";
}

std::string opt_string(const std::optional<std::string>& v) { return v ? *v : "unknown"; }

void diff_field(std::vector<FieldMismatch>& out, const std::string& field, const std::string& a,
                const std::string& b) {
    if (a == b) return;
    const bool unverifiable = a == "unknown" || b == "unknown";
    out.push_back({field, unverifiable ? FieldMismatchKind::Unverifiable : FieldMismatchKind::Differs,
                   a, b});
}

}  // namespace

std::string content_hash(const std::string& data) {
    // FNV-1a, 64 bit: deterministic across platforms and process runs.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void EnvironmentFingerprint::rehash() {
    std::ostringstream os;
    os << cpu_model << '\n'
       << opt_string(governor) << '\n'
       << tri_state(frequency_fixed) << '\n'
       << tri_state(turbo_enabled) << '\n'
       << tri_state(on_ac_power) << '\n'
       << os_descriptor << '\n'
       << tool_version << '\n';
    fingerprint_id = content_hash(os.str());
}

EnvironmentFingerprint capture_fingerprint() {
    EnvironmentFingerprint fp;
    fp.cpu_model = cpu_model_name();
    fp.governor = read_first_line("/sys/devices/system/cpu/cpu0/cpufreq/scaling_governor");
    fp.frequency_fixed = probe_frequency_fixed();
    fp.turbo_enabled = probe_turbo();
    fp.on_ac_power = probe_ac_power();
    fp.os_descriptor = os_descriptor_string();
    fp.tool_version = kToolVersion;
    fp.captured_at = utc_timestamp_now();
    fp.rehash();
    return fp;
}

std::string to_string(EnvWarningKind k) {
    switch (k) {
        case EnvWarningKind::GovernorNotFixed: return "GovernorNotFixed";
        case EnvWarningKind::TurboEnabled: return "TurboEnabled";
        case EnvWarningKind::OnBattery: return "OnBattery";
        case EnvWarningKind::Unknown: return "Unknown";
    }
    return "?";
}

std::vector<EnvWarning> check_environment(const EnvironmentFingerprint& fp) {
    std::vector<EnvWarning> out;

    if (fp.frequency_fixed.has_value() && !*fp.frequency_fixed) {
        std::string gov = fp.governor ? " (governor: " + *fp.governor + ")" : "";
        out.push_back({EnvWarningKind::GovernorNotFixed,
                       "CPU frequency is not pinned" + gov +
                           "; heat management can slow later runs, consider fixing a "
                           "medium-low frequency"});
    }
    if (fp.turbo_enabled.has_value() && *fp.turbo_enabled)
        out.push_back({EnvWarningKind::TurboEnabled,
                       "turbo/boost mode is enabled; early runs may be faster than sustained ones"});
    if (fp.on_ac_power.has_value() && !*fp.on_ac_power)
        out.push_back({EnvWarningKind::OnBattery,
                       "running on battery; plug in a power source before measuring"});

    if (!fp.frequency_fixed)
        out.push_back({EnvWarningKind::Unknown, "frequency pinning state unknown on this system"});
    if (!fp.turbo_enabled)
        out.push_back({EnvWarningKind::Unknown, "turbo/boost state unknown on this system"});
    if (!fp.on_ac_power)
        out.push_back({EnvWarningKind::Unknown, "power source unknown on this system"});

    return out;
}

std::vector<FieldMismatch> diff_fingerprints(const EnvironmentFingerprint& a,
                                             const EnvironmentFingerprint& b) {
    std::vector<FieldMismatch> out;
    diff_field(out, "cpu_model", a.cpu_model, b.cpu_model);
    diff_field(out, "governor", opt_string(a.governor), opt_string(b.governor));
    diff_field(out, "frequency_fixed", tri_state(a.frequency_fixed), tri_state(b.frequency_fixed));
    diff_field(out, "turbo_enabled", tri_state(a.turbo_enabled), tri_state(b.turbo_enabled));
    diff_field(out, "on_ac_power", tri_state(a.on_ac_power), tri_state(b.on_ac_power));
    diff_field(out, "os_descriptor", a.os_descriptor, b.os_descriptor);
    diff_field(out, "tool_version", a.tool_version, b.tool_version);
    return out;
}

}  // namespace benchlab
