"""Setup script for the safe policy improvement toolkit."""

import sys
import subprocess
from pathlib import Path


def check_python_version():
    """Check if Python version is compatible."""
    if sys.version_info < (3, 9):
        print("❌ Python 3.9 or higher is required")
        sys.exit(1)
    print(f"✅ Python {sys.version_info.major}.{sys.version_info.minor} detected")


def install_dependencies():
    """Install required dependencies."""
    print("📦 Installing dependencies...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✅ Dependencies installed successfully")
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install dependencies: {e}")
        sys.exit(1)


def create_env_file():
    """Copy env_example.txt to .env unless one exists."""
    env_file = Path(".env")
    if env_file.exists():
        print("✅ .env file already exists")
        return
    template = Path("env_example.txt")
    if not template.exists():
        print("❌ env_example.txt not found")
        sys.exit(1)
    env_file.write_text(template.read_text())
    print("✅ .env file created from env_example.txt")


def check_benchmarks():
    """Create the output folders and build the smallest instance of every configured benchmark."""
    # Imported here so the dependencies are installed first
    from config import BENCHMARKS, LOGS_DIR, RESULTS_DIR, ensure_output_dirs
    from envs import BENCHMARK_BUILDERS, make_benchmark

    ensure_output_dirs()
    print(f"✅ Output folders: {RESULTS_DIR}, {LOGS_DIR}")

    smoke_params = {
        "random": {"num_states": 10, "num_actions": 2, "branching": 2, "num_traps": 1},
        "wetchicken": {"length": 3, "width": 2},
        "frozenlake": {"map_spec": ["SF", "HG"]},
        "pacman": {"grid_size": 3, "num_ghosts": 1},
    }
    ok = True
    for name in BENCHMARKS:
        if name not in BENCHMARK_BUILDERS:
            print(f"❌ {name}: no builder for this benchmark")
            ok = False
            continue
        try:
            bench = make_benchmark(name, **smoke_params.get(name, {}))
            print(f"✅ {name}: {bench.mdp.num_states} states, {bench.mdp.num_actions} actions")
        except Exception as e:
            print(f"❌ {name}: {e}")
            ok = False
    return ok


def main():
    """Main setup function."""
    print("🚀 Safe SPI Shield Setup")
    print("=" * 50)

    check_python_version()
    install_dependencies()
    create_env_file()
    if not check_benchmarks():
        print("\n⚠️  Some benchmarks could not be built, see above")
        sys.exit(1)

    print("\n🎉 Setup completed!")
    print("\n📋 Next steps:")
    print("1. Optionally edit .env to change the output directory or log level")
    print("2. Run: python main.py benchmarks")
    print("3. Run: pytest")

    print("\n💡 Example usage:")
    print("python main.py run --env frozenlake --sizes 10,50 --runs 5 --methods spibb,spibb_shield")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # Invoked by a build backend (e.g. pip install); metadata lives in pyproject.toml
        from setuptools import setup

        setup()
    else:
        main()
