"""Regenerates the bundled benchmark instances from fixed seeds.

qap15.dat  -- 15-facility QAPLIB-format instance: symmetric integer flows,
              Manhattan distances between random integer grid locations.
pcb12.tsp  -- 12-node EUC_2D TSPLIB instance with random drill-hole
              coordinates; use tsplib:data/pcb12.tsp,subset=10 for d=10.
"""
import random


def qap(n=15, seed=20210202):
    rng = random.Random(seed)
    flow = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.choice([0, 0, 0, 1, 2, 3, 5, 8])
            flow[i][j] = flow[j][i] = v
    loc = [(rng.randint(0, 9), rng.randint(0, 9)) for _ in range(n)]
    dist = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in loc] for a in loc]
    lines = [str(n), ""]
    lines += [" ".join(f"{v:d}" for v in row) for row in flow]
    lines.append("")
    lines += [" ".join(f"{v:d}" for v in row) for row in dist]
    return "\n".join(lines) + "\n"


def tsp(n=12, seed=20210203):
    rng = random.Random(seed)
    lines = [
        "NAME : pcb12",
        "COMMENT : synthetic drilling problem",
        "TYPE : TSP",
        f"DIMENSION : {n}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        "NODE_COORD_SECTION",
    ]
    for i in range(n):
        lines.append(f"{i + 1} {rng.randint(0, 1000)} {rng.randint(0, 1000)}")
    lines.append("EOF")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    with open("qap15.dat", "w") as f:
        f.write(qap())
    with open("pcb12.tsp", "w") as f:
        f.write(tsp())
