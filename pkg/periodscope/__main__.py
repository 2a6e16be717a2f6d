from periodscope.main import main

main()
