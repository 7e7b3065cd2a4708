"""
Setup script for Quantum Grassmannian Tangent Spaces
Run this script to check the environment and run a first verification
"""

import os
import subprocess
import sys
from pathlib import Path

def check_requirements():
    """Check if all required packages are installed"""
    try:
        import sympy
        import numpy
        import pandas
        import dotenv
        print("✅ All required packages are installed")
        return True
    except ImportError as e:
        print(f"❌ Missing required package: {e}")
        return False

def check_env_file():
    """Check if .env file exists; every setting has a default"""
    env_path = Path(".env")
    if not env_path.exists():
        print("ℹ️ .env file not found, using defaults")
        return False
    with open(env_path, 'r') as f:
        keys = [line.split('=')[0].strip() for line in f if '=' in line and not line.startswith('#')]
    print(f"✅ Environment file configured ({', '.join(keys) or 'no overrides'})")
    return True

def create_env_file():
    """Create .env file from template"""
    if not Path(".env").exists():
        if Path(".env.example").exists():
            import shutil
            shutil.copy(".env.example", ".env")
            print("📋 Created .env file from template")
        else:
            print("❌ .env.example file not found")

def run_smoke_check():
    """Run the action convention check at N=2"""
    try:
        print("🚀 Running: python app.py verify actions --N 2 --r 1")
        subprocess.run([sys.executable, "app.py", "verify", "actions", "--N", "2", "--r", "1"], check=True)
        print("✅ Smoke check passed")
    except subprocess.CalledProcessError:
        print("❌ Smoke check failed")
    except KeyboardInterrupt:
        print("\n👋 Stopped by user")

def main():
    """Main setup function"""
    print("🔷 Quantum Grassmannian Tangent Spaces Setup")
    print("=" * 50)

    # Check if we're in the right directory
    if not Path("app.py").exists():
        print("❌ app.py not found. Please run this script from the project root directory.")
        return

    # Check requirements
    if not check_requirements():
        print("📦 Installing requirements...")
        try:
            subprocess.run([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"], check=True)
            print("✅ Requirements installed successfully")
        except subprocess.CalledProcessError:
            print("❌ Failed to install requirements")
            return

    if not check_env_file():
        create_env_file()

    cache_dir = os.getenv("QGR_CACHE_DIR", ".qgr_cache")
    os.makedirs(cache_dir, exist_ok=True)
    print(f"🗂️ Pairing cache directory: {cache_dir}")

    print("\n✅ Setup complete!")

    start = input("\n🚀 Would you like to run a smoke check now? (y/N): ").lower().strip()
    if start in ['y', 'yes']:
        run_smoke_check()
    else:
        print("\n📋 To run the classification later:")
        print("   python app.py classify --N 2 --r 1")

if __name__ == "__main__":
    main()
