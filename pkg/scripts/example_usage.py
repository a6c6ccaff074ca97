#!/usr/bin/env python3
"""
Example usage of the Motif Sketch API.
Make sure the API is running on http://localhost:8000 before running this script
(`python main.py serve`). Runs appear under /runs after `python main.py estimate ... --record`.

Run from project root: python scripts/example_usage.py
"""

import httpx

API_BASE_URL = "http://localhost:8000"


def plan(pattern, m, alpha, target_count, **extra):
    """Ask the planner for colors, group and instance count."""
    response = httpx.post(
        f"{API_BASE_URL}/plan",
        json={"pattern": pattern, "m": m, "alpha": alpha, "target_count": target_count, **extra}
    )

    if response.status_code == 200:
        return response.json()
    else:
        print(f"Error: {response.status_code}")
        print(response.text)
        return None


def search_runs(pattern):
    """Search recorded runs by pattern name."""
    response = httpx.get(
        f"{API_BASE_URL}/runs/search",
        params={"pattern": pattern}
    )

    if response.status_code == 200:
        return response.json()
    else:
        print(f"Error: {response.status_code}")
        print(response.text)
        return None


def main():
    # Example 1: Built-in patterns
    print("=== Example 1: Built-in patterns ===")
    for p in httpx.get(f"{API_BASE_URL}/patterns").json():
        print(f"{p['name']}: t={p['t']}, k={p['k']}, auto={p['auto_count']}")
    print()

    # Example 2: Plans for a large and a small graph
    print("=== Example 2: Planning ===")
    for m, target in ((10 ** 6, 1000), (10 ** 4, 100)):
        result = plan("triangle", m, 0.25, target)
        if result:
            print(f"m={m}, target={target}: C={result['colors']}, group={result['group']}, "
                  f"N={result['instances']}, storage={result['storage_cells']} cells")
    print()

    # Example 3: Search recorded runs
    print("=== Example 3: Searching runs for 'cycle' ===")
    search_results = search_runs("cycle")
    if search_results:
        print(f"Found {search_results['total_count']} runs matching 'cycle'")
        for run in search_results['runs'][:3]:  # Show first 3
            print(f"- run {run['id']}: {run['pattern_name']} ≈ {run['mean']:.4g} ± {run['std_error']:.3g}")

    # Example 4: Handle edge cases
    print("\n=== Example 4: Testing Edge Cases ===")

    print("Zero target count:")
    plan("triangle", 1000, 0.25, 0)

    print("\nUnknown pattern:")
    plan("pentagram", 1000, 0.25, 10)


if __name__ == "__main__":
    main()
