#ifndef HRMAP_RNG_HPP
#define HRMAP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace hrmap {

/* SplitMix64; used for seeding and for mixing stream identifiers */
struct SplitMix64
{
    std::uint64_t mState;

    explicit SplitMix64(std::uint64_t seed) : mState(seed) { }

    std::uint64_t Next()
    {
        std::uint64_t z = (this->mState += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

inline std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b = 0)
{
    SplitMix64 sm(seed ^ (a * 0x9e3779b97f4a7c15ULL) ^
                  (b * 0xd1b54a32d192ed03ULL));
    return sm.Next();
}

/* xoshiro256**, seeded via SplitMix64. A fixed, documented generator
 * so that runs reproduce bit-exactly across platforms. */
class Xoshiro256ss
{
public:
    explicit Xoshiro256ss(std::uint64_t seed)
    {
        SplitMix64 sm(seed);
        for (auto& word : this->mState)
            word = sm.Next();
    }

    std::uint64_t Next()
    {
        const std::uint64_t result =
            Rotl(this->mState[1] * 5, 7) * 9;
        const std::uint64_t t = this->mState[1] << 17;
        this->mState[2] ^= this->mState[0];
        this->mState[3] ^= this->mState[1];
        this->mState[1] ^= this->mState[2];
        this->mState[0] ^= this->mState[3];
        this->mState[2] ^= t;
        this->mState[3] = Rotl(this->mState[3], 45);
        return result;
    }

    /* Uniform in [0, 1) with 53-bit resolution */
    double Uniform()
    {
        return static_cast<double>(this->Next() >> 11) * 0x1.0p-53;
    }

    double Uniform(double lo, double hi)
    {
        return lo + (hi - lo) * this->Uniform();
    }

    /* Box-Muller; two uniforms per draw, no cached spare */
    double Gaussian(double sigma = 1.0)
    {
        const double u1 =
            (static_cast<double>(this->Next() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = this->Uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * M_PI * u2);
    }

    /* Knuth's method; adequate for the small rates used here */
    int Poisson(double lambda)
    {
        if (lambda <= 0.0)
            return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= this->Uniform();
        } while (p > limit);
        return k - 1;
    }

private:
    static std::uint64_t Rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t mState[4];
};

} // namespace hrmap

#endif // HRMAP_RNG_HPP
