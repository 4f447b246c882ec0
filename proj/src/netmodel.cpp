#include "latalloc/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "latalloc/text.hpp"

namespace latalloc::net {

Topology::Topology(std::size_t applicants, std::size_t resources,
                   std::vector<double> base_latency, double jitter,
                   std::vector<FailureWindow> failures)
    : applicants_(applicants),
      resources_(resources),
      base_latency_(std::move(base_latency)),
      jitter_(jitter),
      failures_(std::move(failures)) {
    if (base_latency_.size() != applicants_ * resources_) {
        throw Error("topology latency table has " + std::to_string(base_latency_.size()) +
                    " entries, expected " + std::to_string(applicants_ * resources_));
    }
    for (double v : base_latency_) {
        if (!std::isfinite(v) || v < 0.0) throw Error("base latency must be finite and >= 0");
    }
    if (!(jitter_ >= 0.0 && jitter_ <= 1.0)) throw Error("jitter must be in [0, 1]");
    for (const auto& w : failures_) {
        if (w.resource.value >= resources_) {
            throw Error("failure window names unknown resource " + std::to_string(w.resource.value));
        }
        if (!(w.fail_at < w.recover_at)) throw Error("failure window needs fail_at < recover_at");
    }
}

double Topology::base_latency(ApplicantId applicant, ResourceId resource) const {
    if (applicant.value >= applicants_ || resource.value >= resources_) {
        throw Error("unknown pair (" + std::to_string(applicant.value) + ", " +
                    std::to_string(resource.value) + ")");
    }
    return base_latency_[applicant.value * resources_ + resource.value];
}

bool Topology::is_failed(ResourceId resource, SimTime now) const {
    return std::any_of(failures_.begin(), failures_.end(), [&](const FailureWindow& w) {
        return w.resource == resource && now >= w.fail_at && now < w.recover_at;
    });
}

std::optional<std::vector<double>> probe(const Topology& topology, ApplicantId applicant,
                                         ResourceId resource, std::size_t count, SimTime now,
                                         Rng& rng) {
    if (count == 0) throw Error("probe count must be >= 1");
    const double base = topology.base_latency(applicant, resource);
    if (topology.is_failed(resource, now)) return std::nullopt;
    std::vector<double> samples(count);
    const double j = topology.jitter();
    for (auto& s : samples) s = std::max(0.0, base * (1.0 + rng.uniform(-j, j)));
    return samples;
}

Topology generate_topology(std::size_t applicants, std::size_t resources,
                           std::pair<double, double> latency_range, double jitter, Rng& rng,
                           std::vector<FailureWindow> failures) {
    const auto [lo, hi] = latency_range;
    if (!(lo >= 0.0 && hi >= lo)) throw Error("latency range needs 0 <= lo <= hi");
    std::vector<double> base(applicants * resources);
    for (auto& b : base) b = rng.uniform(lo, hi);
    return Topology(applicants, resources, std::move(base), jitter, std::move(failures));
}

void write_topology(std::ostream& os, const TopologyArchive& archive) {
    const auto& t = archive.topology;
    os << "# latalloc topology\n";
    os << "version 1\n";
    os << "seed " << archive.seed << '\n';
    os << "applicants " << t.applicants() << '\n';
    os << "resources " << t.resources() << '\n';
    os << "jitter " << text::format_double(t.jitter()) << '\n';
    for (std::uint32_t a = 0; a < t.applicants(); ++a) {
        for (std::uint32_t r = 0; r < t.resources(); ++r) {
            os << "latency " << a << ' ' << r << ' '
               << text::format_double(t.base_latency(ApplicantId{a}, ResourceId{r})) << '\n';
        }
    }
    for (const auto& w : t.failures()) {
        os << "failure " << w.resource.value << ' ' << text::format_double(w.fail_at) << ' '
           << text::format_double(w.recover_at) << '\n';
    }
}

TopologyArchive read_topology(std::istream& is) {
    TopologyArchive archive;
    std::size_t applicants = 0;
    std::size_t resources = 0;
    double jitter = 0.0;
    bool have_header = false;
    std::vector<double> base;
    std::vector<bool> seen;
    std::vector<FailureWindow> failures;

    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw Error("topology line " + std::to_string(line_no) + ": " + what);
    };
    auto ensure_table = [&] {
        if (have_header) return;
        if (applicants == 0 || resources == 0) fail("latency before applicants/resources");
        base.assign(applicants * resources, 0.0);
        seen.assign(applicants * resources, false);
        have_header = true;
    };

    while (std::getline(is, line)) {
        ++line_no;
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto words = text::split(body, ' ');
        const auto key = words.front();
        try {
            if (key == "version") {
                if (words.size() != 2 || text::parse_u64(words[1]) != 1) fail("unsupported version");
            } else if (key == "seed" && words.size() == 2) {
                archive.seed = text::parse_u64(words[1]);
            } else if (key == "applicants" && words.size() == 2) {
                applicants = text::parse_u64(words[1]);
            } else if (key == "resources" && words.size() == 2) {
                resources = text::parse_u64(words[1]);
            } else if (key == "jitter" && words.size() == 2) {
                jitter = text::parse_double(words[1]);
            } else if (key == "latency" && words.size() == 4) {
                ensure_table();
                const auto a = text::parse_u64(words[1]);
                const auto r = text::parse_u64(words[2]);
                if (a >= applicants || r >= resources) fail("pair out of range");
                base[a * resources + r] = text::parse_double(words[3]);
                seen[a * resources + r] = true;
            } else if (key == "failure" && words.size() == 4) {
                failures.push_back({ResourceId{static_cast<std::uint32_t>(text::parse_u64(words[1]))},
                                    text::parse_double(words[2]), text::parse_double(words[3])});
            } else {
                fail("unrecognised entry '" + std::string(body) + "'");
            }
        } catch (const Error& e) {
            if (std::string(e.what()).rfind("topology line", 0) == 0) throw;
            fail(e.what());
        }
    }
    ensure_table();
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw Error("topology is missing latency entries");
    }
    archive.topology = Topology(applicants, resources, std::move(base), jitter, std::move(failures));
    return archive;
}

}  // namespace latalloc::net
