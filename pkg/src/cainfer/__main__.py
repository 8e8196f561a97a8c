from cainfer.cli import main

main()
