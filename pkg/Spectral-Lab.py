from dotenv import load_dotenv

from scripts.cli import main

# Load environment variables
load_dotenv()


if __name__ == "__main__":
    main()
