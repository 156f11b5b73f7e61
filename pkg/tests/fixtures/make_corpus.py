"""Regenerate the frozen fixture corpus (run once; outputs are committed).

60 seeded instances with n <= 6 and N <= 12.
"""

from pathlib import Path

from guillopack.bench import gen_random
from guillopack.core import dump_json, instance_to_dict

OUT = Path(__file__).parent / "corpus"


def main() -> None:
    OUT.mkdir(exist_ok=True)
    k = 0
    for seed in range(60):
        n = 1 + seed % 6
        N = 4 + seed % 9
        profile = ("mixed", "mixed", "skewed", "small")[seed % 4]
        if profile == "skewed" and N < 8:
            profile = "mixed"
        inst = gen_random(n, N, profile, seed=1000 + seed, max_profit=1 if seed % 3 else 5)
        dump_json(instance_to_dict(inst), OUT / f"c{k:03d}_{profile}_n{n}_N{N}.json")
        k += 1


if __name__ == "__main__":
    main()
